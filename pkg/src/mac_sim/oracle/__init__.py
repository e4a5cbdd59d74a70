"""Dense exact-diagonalization reference used to validate the Gaussian code paths."""
