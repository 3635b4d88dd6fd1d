"""Flash strategies, predictable jumps and their discrete-tree oracles."""

from .costs import (
    CostSpec,
    batch_gains_with_costs,
    build_nonrobust_counterexample,
    c_bar,
    eps_close_check,
    epsilon_star,
    gains_with_costs,
    robust_bound,
)
from .detector import (
    detect_predictable_jumps,
    find_martingale_measure,
    search_sure_profit,
    verify_equivalence,
)
from .filtration import AnnouncingSequence, InformationView, LookaheadError, cond_stats_path
from .laws import Exponential, PointMass, RandomSign, TwoPoint, Uniform
from .market_models import (
    Constant,
    Deterministic,
    Dividend,
    ExponentialClock,
    FirstHitting,
    GaussianWalk,
    JumpSpec,
    LinearDrift,
    ModelError,
    ModelSpec,
    PathGenerator,
    Predictability,
    RightJump,
    ScenarioTree,
    TimeGrid,
    binomial_tree,
    build_tree,
    enumerate_trees,
    random_tree,
    sample_paths,
)
from .strategies import (
    BuyAndHold,
    evaluate_flash,
    make_bounded_loss_strategy,
    make_constant_profit_strategy,
    make_long_only_variant,
    make_right_jump_strategy,
    make_sure_profit_strategy,
)

__version__ = "0.1.0"
