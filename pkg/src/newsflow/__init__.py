"""Analytics over social-media corpora: source-credibility labeling,
heavy-tailed engagement fitting, commenting-lifetime survival analysis, and
echo-chamber measurement over follow graphs."""

from .corpus import (Comment, Corpus, FollowEdge, IngestFilter, Post, Window,
                     corpus_stats, extract_domain, ingest, links_only)
from .errors import (DegenerateInput, EmptyResult, FitFailure, NewsflowError,
                     UsageError)
from .heavytail import (DiscretePowerLaw, EngagementSample, PowerLawFit,
                        WaldResult, ccdf, fit_discrete_powerlaw, hurwitz_zeta,
                        sample_powerlaw, wald_compare)
from .leaning import (FollowGraph, JointLeaningDensity, LeaningDensity,
                      LeaningVector, joint_density, leaning_correlation,
                      neighborhood_leaning, user_leaning)
from .report import ReportBundle, RunConfig, run_pipeline, time_series
from .sources import (CredibilityLabel, Label, OutletRecord, OutletRegistry,
                      classify_outlet, label_posts, load_registry)
from .survival import (KaplanMeier, LifetimeRecord, PetoPetoResult,
                       SurvivalCurve, kaplan_meier, peto_peto, post_lifetimes,
                       user_lifetimes)
from .synth import SynthConfig, generate, generate_follow_graph, rewire_edges

__version__ = "0.1.0"
