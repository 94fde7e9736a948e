"""
Output Row Schemas
Pydantic models of the rows each command writes; the CSV columns and the --schema output come from them
"""

from typing import Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, create_model

DEPTHS = tuple(range(5))


class Row(BaseModel):
    model_config = ConfigDict(extra='forbid')


class Table1Row(Row):
    """One (cap, depth) entry of the pulsed summary table"""
    scenario: str
    n: int
    a: Union[float, str]
    kappa_sigma: Optional[float] = None
    P1: Optional[float] = None
    F: Optional[float] = None
    L_from_km: Optional[int] = None
    L_to_km: Optional[int] = None
    note: Optional[str] = None


class Table2Row(Row):
    """One depth of the continuous-drive summary table"""
    scenario: str
    n: int
    kappa_T: Optional[float] = None
    x2: Optional[float] = None
    F: Optional[float] = None
    L_from_km: Optional[int] = None
    L_to_km: Optional[int] = None
    note: Optional[str] = None


class SolveRow(Row):
    """A single inversion of the fidelity for a drive parameter"""
    scenario: str
    n: int
    target_f: float
    param_name: str
    param_value: float
    achieved_f: float
    iterations: int
    bracket_lo: float
    bracket_hi: float
    kappa_sigma: Optional[float] = None
    kappa_T: Optional[float] = None
    purity: Optional[float] = None
    clamped: bool = False


def _cap_label(cap):
    return 'inf' if cap is None or cap == float('inf') else f'{cap:g}'


def purity_sweep_row(depths: Sequence[int] = DEPTHS):
    fields = {'kappa_sigma': (float, ...), 'purity': (float, ...)}
    for prefix in ('F_exact', 'F_approx'):
        fields.update({f'{prefix}_n{n}': (float, ...) for n in depths})
    return create_model('PuritySweepRow', __base__=Row, **fields)


def p1_targets_row(caps: Sequence[float], depths: Sequence[int] = DEPTHS):
    fields = {'kappa_sigma': (float, ...)}
    fields.update({f'P1max_a{_cap_label(cap)}': (float, ...) for cap in caps if _cap_label(cap) != 'inf'})
    # blank where the depth cannot reach the target at this width
    fields.update({f'P1_target_n{n}': (Optional[float], None) for n in depths})
    return create_model('P1TargetsRow', __base__=Row, **fields)


def rate_curve_row(depths: Sequence[int]):
    """One chain (distance, depth): its probabilities, fidelity, rate and multiplexed time"""
    fields = {'scenario': (str, ...), 'n': (int, ...), 'L_km': (float, ...)}
    # P1..Pn are swap probabilities, blank beyond the row's depth
    fields.update({f'P{i}': (Optional[float], None) for i in range(max(depths) + 1)})
    fields.update({
        'P_PS': (float, ...), 'F': (float, ...), 'rate_hz': (float, ...),
        't_total_s': (Optional[float], None), 'best': (bool, False),
    })
    return create_model('RateCurveRow', __base__=Row, **fields)


def intensity_sweep_row(depths: Sequence[int] = DEPTHS):
    fields = {'x2': (float, ...)}
    fields.update({f'F_n{n}': (Optional[float], None) for n in depths})
    fields.update({f'rate_n{n}': (Optional[float], None) for n in depths})
    return create_model('IntensitySweepRow', __base__=Row, **fields)


def columns(row_model):
    return list(row_model.model_fields)
