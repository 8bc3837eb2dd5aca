"""PFD_avg of MooN safety architectures by four independent methods."""
