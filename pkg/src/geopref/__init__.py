"""geopref: scene-level 3D consistency scoring, geometric preference
curation, and velocity-prediction DPO utilities for video frame sequences.

Core workflow:
    1. Obtain per-frame depth maps and camera poses for a video (the
       bundled synthetic oracle renders exact ones; a geometry-model
       adapter can export real ones in the interchange format).
    2. Score the sequence: fuse frames into one colored point cloud,
       reproject it into every sampled frame, and average reconstruction
       error (scoring.score).
    3. Rank candidate generations per conditioning context and curate
       winner/loser preference pairs with motion, margin and quality
       filters (curation.curate).
    4. Feed pairs to the velocity-prediction preference objective
       (dpo.dpo_loss / dpo.toy_align).
"""

from .camera import (CameraPose, ColoredPointCloud, Intrinsics, backproject,
                     reproject, rotation_about_axis, rotation_angle)
from .curation import (Candidate, CurationConfig, CurationReport,
                       PreferencePair, build_pairs, curate)
from .dpo import (AlignmentTrace, DpoSample, EnergyQuad, NoiseSchedule,
                  cosine_schedule, dpo_loss, energy, noisy_latent,
                  separable_cohort, toy_align, velocity_target)
from .epipolar import (Correspondence, FundamentalMatrix,
                       estimate_fundamental, fundamental_from_poses,
                       sampson_error)
from .errors import (DegenerateGeometryError, GeoprefError, SceneIOError,
                     TrainingDivergedError, ValidationError)
from .metrics import (PerceptualMetric, load_perceptual_table, mse,
                      perceptual_distance, precomputed_external, psnr, ssim,
                      structural_surrogate)
from .motion import MotionStats, is_static, motion_stats
from .oracle import Corruptor, OracleScene, corrupt, render_scene
from .prompts import (MotionVocabulary, PromptScript, batch_prompts,
                      default_vocabulary, generate_prompt)
from .scene_io import read_scene, write_scene
from .scoring import (ConsistencyReport, SceneSequence, fuse, sample_frames,
                      score)

__version__ = "0.1.0"
