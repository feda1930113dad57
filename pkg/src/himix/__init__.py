"""Hierarchical instance mixing and twin-head pseudo-label fusion toolkit."""

from .core import (DataError, IGNORE_VALUE, Image, LabelMap, ProbMap, Rng, RngState,
                   class_pixel_counts, derive_rng, load_pmap, rng_for, save_pmap, validate)
from .instances import (SOURCE, TARGET, InstanceInfo, InstanceMap,
                        extract_instances, relabel_disjoint)
from .mixing import (Layer, LayerStack, MixMask, blend, build_layer_stack,
                     classmix_mask, himix, reduce_to_mask, select_source_instances)
from .fusion import (DEFAULT_TAU, FusionConfig, WeightMap, confidence_fraction,
                     fuse_probabilities, generate_pseudo_label_pair, pseudo_label,
                     weight_map, weighted_cross_entropy)
from .augment import (GeometricTransform, PhotometricParams, apply_geometric,
                      apply_photometric, crop, invert_geometric, resize,
                      sample_geometric, sample_photometric)
from .synth import (EpisodeReport, MockSegmenter, MockSegmenterConfig, PALETTE,
                    SceneConfig, generate_scene, mock_segment, run_pipeline_episode)
from .metrics import (BalanceStats, ConfusionMatrix, balance_trial, bench_compare,
                      confusion, miou)

__version__ = "0.1.0"
