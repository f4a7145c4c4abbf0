"""Root systems, Heckman-Opdam operators, the rank-one oracle, process simulators, estimators and the experiment runner."""
