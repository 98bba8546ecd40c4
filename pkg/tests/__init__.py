"""
Test suite for quadctrl.
"""
