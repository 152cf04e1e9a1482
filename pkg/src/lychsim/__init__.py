"""Headless 3D simulation with exact 2D/3D ground truth.

Core surface: build a Catalog of annotated assets, populate a SceneWorld,
render aligned ground-truth buffer stacks, derive per-object occlusion and
truncation annotations, generate scenes procedurally, and probe vision
models with the adversarial viewpoint examiner.  The same world is
reachable over a framed TCP protocol (lychsim.server) and as MCP tools
(lychsim.mcp).
"""

from .assets import AssetRecord, Catalog, canonicalize, load_catalog
from .errors import SimError
from .examiner import (ExaminerConfig, ExaminerReport, GaussianPolicy,
                       ViewpointBounds, ViewpointParams, run_examiner,
                       sphere_pose)
from .geometry import (Aabb, Hit, Pose, Ray, Rotator, rotator_to_matrix,
                       world_aabb)
from .groundtruth import (ObjectAnnotation, annotate_all, bbox_2d,
                          occlusion_graph, occlusion_ratio, truncation_ratio)
from .mesh import TriangleMesh, load_obj, make_primitive, save_obj
from .procedural import (GenerationConfig, ProceduralRule, generate_scene,
                         parse_rules, parse_rules_text, sample_in_area,
                         sample_on_trajectory, spline_point)
from .renderer import (FrameSet, InstanceDepthBuffer, pointmap_in_space,
                       render, render_cameras, render_instance_alone)
from .world import CameraState, SceneParams, SceneWorld

__version__ = "0.1.0"

__all__ = [
    "Aabb", "AssetRecord", "CameraState", "Catalog", "ExaminerConfig",
    "ExaminerReport", "FrameSet", "GaussianPolicy", "GenerationConfig",
    "Hit", "InstanceDepthBuffer", "ObjectAnnotation", "Pose",
    "ProceduralRule", "Ray", "Rotator", "SceneParams", "SceneWorld",
    "SimError", "TriangleMesh", "ViewpointBounds", "ViewpointParams",
    "annotate_all", "bbox_2d", "canonicalize", "generate_scene",
    "load_catalog", "load_obj", "make_primitive", "occlusion_graph",
    "occlusion_ratio", "parse_rules", "parse_rules_text",
    "pointmap_in_space", "render", "render_cameras",
    "render_instance_alone", "rotator_to_matrix", "run_examiner",
    "sample_in_area", "sample_on_trajectory", "save_obj", "sphere_pose",
    "spline_point", "truncation_ratio", "world_aabb",
]
