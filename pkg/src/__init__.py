"""AQFOCK - radial Bargmann representations of (alpha,q)-Gaussian distributions"""
