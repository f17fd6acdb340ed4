"""mmWave Low-Resolution Scheduling - CLI modules"""
