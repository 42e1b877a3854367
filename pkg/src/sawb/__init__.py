"""Sea state estimation from small-vessel motion spectra.

Simulates heave, pitch and roll responses of a small uncrewed surface
vessel in Modified Pierson-Moskowitz seas, turns them into Welch response
spectra and trains branch/trunk MLPs that estimate significant wave height,
mean wave period and relative wave heading.
"""

__version__ = "0.1.0"
