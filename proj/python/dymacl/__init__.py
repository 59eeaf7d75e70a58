"""Two-team gridworld battles with an agent-count-agnostic Q-network.

The C++ core does the work; this package re-exports it. Typical use:

    import dymacl

    cfg = dymacl.WorldConfig()
    cfg.team_a_size = cfg.team_b_size = 3
    world = dymacl.World.reset(cfg)

    spec = dymacl.DyanSpec()
    net = dymacl.build(spec, seed=0)
    out = net.forward(world.observe(0))
"""

from dymacl._core import *  # noqa: F401,F403
from dymacl._core import __doc__ as _core_doc

__doc__ = (__doc__ or "") + "\n" + (_core_doc or "")
