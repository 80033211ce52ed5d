'''
Example script to show how you could include episbn and use it in your own scripts: generate a
network, pick unlikely evidence, and compare EPIS against likelihood weighting.
'''

import logging

from episbn import (Algorithm, GenSpec, SamplerConfig, compare, generate_evidence,
                    generate_network, posteriors, run_sampler)



logging.info('Generating a network...')
network = generate_network(GenSpec(nodes=20, max_parents=3, p_ext=0.15, seed=11))
evidence = generate_evidence(network, 3, seed=11, leaves_only=True, require_positive=True)
exact = posteriors(network, evidence)
logging.info(f"Exact P(E) = {exact.evidence_probability:.3e}")

# d of None lets EPIS pick its propagation length from the depth of the evidence.
for config in (SamplerConfig(algorithm=Algorithm.epis, m=50000, seed=1),
               SamplerConfig(algorithm=Algorithm.lw, m=50000, seed=1)):
    estimate = run_sampler(network, evidence, config)
    report = compare(exact, estimate, evidence)
    print(f"{config.algorithm.name:>5}: P(E) ~ {estimate.evidence_probability:.3e}, "
          f"Hellinger {report.hellinger:.4f}, MSE {report.mse:.2e}")
