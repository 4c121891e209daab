"""
Test package for the isomonodromy reduction engine
"""
