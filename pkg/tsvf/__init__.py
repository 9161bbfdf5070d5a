"""
Two-state vector formalism laboratory.
"""
