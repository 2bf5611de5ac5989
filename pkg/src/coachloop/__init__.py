"""Human-in-the-loop lifestyle coaching backend.

Weekly plan composition from a caregiver-curated activity pool, one-click
compliance and mood reporting over a Telegram-compatible wire format, and
two incremental KNN models whose labels come from caregiver plan actions.
All state is event-sourced and replayable; a seeded cohort simulator
exercises the whole loop end to end.
"""

__version__ = "0.1.0"
