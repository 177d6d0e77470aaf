"""Dense coding and swap dynamics of two coupled spins."""
