"""
Integration suites for quadctrl.

These run the randomized equivalence and identity properties at full scale
(hundreds to thousands of exact instances each) and the N=2000 reachable
cloud checks. They are deselected by default.

Running integration tests:
    pytest tests/integration/ -m integration -v --no-cov
"""
