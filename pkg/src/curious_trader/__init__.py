"""Information-arrival trading agent with distribution-distance evaluation.

Submodules: ``numerics``, ``bass_diffusion``, ``divergence``, ``jl_projection``,
``market``, ``agent``, ``evaluation``, ``reports``, ``config`` and ``cli``.
"""

__version__ = "0.1.0"
