# baseline/__init__.py - Local (first-order optimal) solver used for comparison and warm starts.

from baseline.sca import InitStrategy, ScaConfig, ScaRun, ScaStatus, init_precoders, sca_iterate, sca_run, sca_solve
