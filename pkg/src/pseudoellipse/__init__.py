"""pseudoellipse: exact classification of transversal maps P^n_p -> P^N_q."""
__version__ = "0.1.0"
