'''
What to run when you run the package as a program (python -m episbn ...). Most people will probably
want to import episbn into their own Python program instead.
'''

import sys

from .cli import main



sys.exit(main(sys.argv[1:]))
