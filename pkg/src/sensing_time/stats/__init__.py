from .anova import DegenerateGroup, TukeyRow, WelchResult, tukey_hsd, welch_anova
from .correlation import PearsonResult, ZeroVariance, pearson_r
from .descriptive import (
    BoxStats,
    EmptyData,
    EmptyGroup,
    GroupSummary,
    TooFewPoints,
    box_stats,
    group_summary,
    iqr_outlier_filter,
    miss_filter,
    quantile,
    summarize,
)
from .glm import (
    DegenerateResponse,
    GlmResult,
    MissingCovariate,
    RankDeficientDesign,
    Term,
    fit_glm,
    fitness_terms,
    sequential_anova,
)
from .ptukey import studentized_range_cdf, studentized_range_ppf, studentized_range_sf
from .shapiro import SampleSizeOutOfRange, ShapiroResult, shapiro_wilk
from .special import NonConvergence, f_cdf, f_sf, inc_beta, inc_beta_pair, t_cdf, t_sf, t_two_sided
