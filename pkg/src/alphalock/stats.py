"""Between-condition statistics: one-way ANOVA and Tukey's HSD."""

from typing import NamedTuple

import numpy as np
from scipy import stats as sp_stats


class AnovaResult(NamedTuple):
    f_stat: float
    df_between: int
    df_within: int
    p_value: float


class TukeyPair(NamedTuple):
    group_a: int
    group_b: int
    diff: float
    ci_low: float
    ci_high: float
    p_value: float


def _validated_groups(groups):
    arrays = [np.asarray(g, dtype=float).ravel() for g in groups]
    if len(arrays) < 2:
        raise ValueError(f"need at least 2 groups, got {len(arrays)}")
    for i, g in enumerate(arrays):
        if g.size < 2:
            raise ValueError(f"group {i} needs at least 2 values, got {g.size}")
        if not np.all(np.isfinite(g)):
            raise ValueError(f"group {i} contains non-finite values")
    return arrays


def _decompose(arrays):
    """Between/within sums of squares and degrees of freedom."""
    n_total = sum(g.size for g in arrays)
    grand = sum(g.sum() for g in arrays) / n_total
    ss_between = sum(g.size * (g.mean() - grand) ** 2 for g in arrays)
    ss_within = sum(((g - g.mean()) ** 2).sum() for g in arrays)
    df_between = len(arrays) - 1
    df_within = n_total - len(arrays)
    return ss_between, ss_within, df_between, df_within


def one_way_anova(groups) -> AnovaResult:
    """Fixed-effects one-way ANOVA.

    Raises when any within-group variance is degenerate (zero within
    sum of squares makes F undefined or infinite).
    """
    arrays = _validated_groups(groups)
    ss_between, ss_within, df_between, df_within = _decompose(arrays)
    if ss_within <= 0:
        raise ValueError("zero within-group variance; F is undefined")
    f_stat = (ss_between / df_between) / (ss_within / df_within)
    p = float(sp_stats.f.sf(f_stat, df_between, df_within))
    return AnovaResult(
        f_stat=float(f_stat),
        df_between=df_between,
        df_within=df_within,
        p_value=min(max(p, 0.0), 1.0),
    )


def tukey_hsd(groups, alpha=0.05):
    """All pairwise comparisons with studentized-range critical values.

    Returns one TukeyPair per (a, b) with a < b; diff is mean(b) -
    mean(a). Unequal group sizes use the Tukey-Kramer standard error.
    """
    arrays = _validated_groups(groups)
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    _, ss_within, _, df_within = _decompose(arrays)
    if ss_within <= 0:
        raise ValueError("zero within-group variance; comparisons are undefined")
    mse = ss_within / df_within
    k = len(arrays)
    q_crit = float(sp_stats.studentized_range.ppf(1.0 - alpha, k, df_within))
    pairs = []
    for a in range(k):
        for b in range(a + 1, k):
            diff = arrays[b].mean() - arrays[a].mean()
            se = np.sqrt(mse / 2.0 * (1.0 / arrays[a].size + 1.0 / arrays[b].size))
            half = q_crit * se
            p = float(sp_stats.studentized_range.sf(abs(diff) / se, k, df_within))
            pairs.append(
                TukeyPair(
                    group_a=a,
                    group_b=b,
                    diff=float(diff),
                    ci_low=float(diff - half),
                    ci_high=float(diff + half),
                    p_value=min(max(p, 0.0), 1.0),
                )
            )
    return pairs


def aggregate_subject_means(rows):
    """Collapse (group, subject, value) rows to one mean per subject.

    Subjects with several values in a group (repeated nights) are
    averaged first so each contributes once; missing combinations are
    simply absent. Returns {group: [subject means in first-seen
    subject order]}.
    """
    sums = {}
    counts = {}
    group_order = []
    subject_order = {}
    for group, subject, value in rows:
        key = (group, subject)
        if group not in subject_order:
            subject_order[group] = []
            group_order.append(group)
        if key not in sums:
            sums[key] = 0.0
            counts[key] = 0
            subject_order[group].append(subject)
        sums[key] += float(value)
        counts[key] += 1
    return {
        group: [sums[(group, s)] / counts[(group, s)] for s in subject_order[group]]
        for group in group_order
    }
