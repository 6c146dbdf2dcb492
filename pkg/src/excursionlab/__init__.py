"""excursionlab: Monte Carlo checks of stationary-diffusion excursion identities.

Samples the excursion straddling a fixed time for reflecting Brownian motion
with drift, doubly reflected Brownian motion and the squared radial OU
process; verifies the equality in law of the occupation pair (I+, I-) with
the straddle pair (-g0, d0), their joint Laplace transform, the conditional
uniformity of the split, excursion-bridge uniformity via Bessel(3) bridges
and the Vervaat transform, Ray-Knight local-time representations, and the
Levy/spectral structure of the inverse local time.
"""

from .models import (DiffusionModel, green00, lt_joint_from_green, make_model,
                     stationary_sample)
from .pathsim import LegResult, PathConfig, run_leg
from .excursions import (IdentitySamples, StraddlingExcursion,
                         conditional_uniformity, identity_samples,
                         independence_check, sample_straddling)
from .bridges import (BridgeSample, bridge_occupation,
                      brownian_bridge_occupation, sample_bessel3_bridge,
                      time_above_zero, vervaat)
from .rayknight import (CirRun, local_time_band_estimate, sample_hit_exp_level,
                        simulate_cir, total_local_time_profile)
from .stats import (EmpiricalDistribution, empirical_joint_lt, ks_one_sample,
                    ks_two_sample)
from .rng import substream

__version__ = "0.1.0"
