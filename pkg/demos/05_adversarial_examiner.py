"""Hunt a segmenter's weak viewpoints with the CEM examiner.

The built-in flawed oracle segments almost perfectly except at grazing
camera elevations, where its mask slides off target.  The Gaussian policy
over (azimuth, elevation, radius) starts broad and is expected to collapse
onto that weak band, reporting the worst discovered viewpoints.
"""

import numpy as np

from lychsim import (Catalog, ExaminerConfig, SceneWorld, ViewpointBounds,
                     run_examiner)

catalog = Catalog()
catalog.add_primitive("/Game/Demo/SM_Crate.SM_Crate", "box", [100, 100, 100],
                      category="crate")
world = SceneWorld(catalog)
world.spawn_object("target", "/Game/Demo/SM_Crate.SM_Crate",
                   location=(0, 0, -50))

config = ExaminerConfig(
    population=16, elite_frac=0.25, alpha=0.7, iterations=30, seed=3,
    bounds=ViewpointBounds(elevation=(0.0, 60.0), radius=(250.0, 450.0)),
    width=320, height=240)

report = run_examiner(world, "target", "flawed", config)

print(f"total renders      {report.total_renders}")
print(f"best IoU           {report.best_iou:.3f}")
bv = report.best_viewpoint
print(f"best viewpoint     az={bv.azimuth:.1f}  elev={bv.elevation:.1f}  "
      f"r={bv.radius:.0f}")
print(f"final policy mean  elev={report.final_policy.mean.elevation:.1f}  "
      f"std={np.round(report.final_policy.stddev, 2)}")
print("failure gallery (worst first):")
for v, iou in report.gallery:
    print(f"   IoU {iou:.3f} at az={v.azimuth:6.1f} elev={v.elevation:5.1f} "
          f"r={v.radius:.0f}")

# per-iteration mean IoU: watch the search walk into the weak band
per_iter = {}
for s in report.trace:
    per_iter.setdefault(s.iteration, []).append(s.iou)
trend = [float(np.mean(v)) for _, v in sorted(per_iter.items())]
print("mean IoU per iteration:", np.round(trend, 2))
