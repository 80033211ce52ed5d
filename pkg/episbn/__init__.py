'''
Runs when episbn gets imported as a module. Handles various housekeeping items: checks Python
version, reads config, sets up logging, and manages relational importing.
'''

import sys
import configparser
import os

from logging.config import dictConfig



# Assert that we're running Python version >= 3.9.
if (sys.version_info[0] < 3 or (sys.version_info[0] == 3 and sys.version_info[1] < 9)):
    raise Exception("Python 3.9 or a more recent version is required.")


from .utils import *


# Read in constants. defaults.ini sits next to the package; config.ini in the working directory
# overrides it.
CFG = configparser.ConfigParser()
CFG.read(os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'defaults.ini'))
CFG.read(os.path.join('config.ini'))

LOG_LEVEL = CFG.get('GENERAL', 'LOG_LEVEL', fallback='INFO')
LOG_FILE = CFG.get('GENERAL', 'LOG_FILE', fallback='episbn_runs.log')

ENUMERATION_CAP = CFG.getint('INFERENCE', 'ENUMERATION_CAP', fallback=2 ** 22)
FACTOR_CAP = CFG.getint('INFERENCE', 'FACTOR_CAP', fallback=2 ** 24)
MAX_PROPAGATION_LENGTH = CFG.getint('INFERENCE', 'MAX_PROPAGATION_LENGTH', fallback=5)
ROW_SUM_TOLERANCE = CFG.getfloat('INFERENCE', 'ROW_SUM_TOLERANCE', fallback=1e-9)
LBP_BASELINE_ITERATIONS = CFG.getint('INFERENCE', 'LBP_BASELINE_ITERATIONS', fallback=100)

BLOCK_SIZE = CFG.getint('SAMPLING', 'BLOCK_SIZE', fallback=4096)
DEFAULT_SAMPLES = CFG.getint('SAMPLING', 'DEFAULT_SAMPLES', fallback=320000)

EVIDENCE_RETRIES = CFG.getint('GENERATION', 'EVIDENCE_RETRIES', fallback=100)
FLOOR = CFG.getfloat('GENERATION', 'FLOOR', fallback=0.001)
SMALL_PROBABILITY = CFG.getfloat('GENERATION', 'SMALL_PROBABILITY', fallback=0.01)

# Configure logging
dictConfig({
    'version': 1,
    'formatters': {
        'default': {
            'format': '%(asctime)s %(levelname)-8s [%(filename)s:%(lineno)d] %(message)s',
        },
        'minimal': {
            'format': '[%(filename)s:%(lineno)d] %(message)s',
        }
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'default'
        },
        'filehandler': {
            'class': 'logging.FileHandler',
            'filename': LOG_FILE,
            'mode': 'w',
            'delay': True,
            'level': 'DEBUG',
            'formatter': 'minimal'
        }
    },
    'loggers': {
        'runs': {
            'propagate': False,
            'handlers': ['filehandler']
        }
    },
    'root': {
        'level': LOG_LEVEL,
        'handlers': ['console']
    },
    'disable_existing_loggers': False
})


from .network import *
from .model_io import *
from .exact import *
from . import lbp
from .importance import *
from .sampling import *
from .netgen import *
from .harness import *
