import streamlit as st
from typing import Any, Dict, Optional

from utils.census import CensusReport
from utils.config import settings
from utils.golden import ComparisonReport
from utils.workbench import Workbench


def init_session_state():
    """Initialize session state variables if they don't exist"""
    if 'white_rule' not in st.session_state:
        st.session_state.white_rule = settings.WHITE_RULE

    if 'black_rule' not in st.session_state:
        st.session_state.black_rule = settings.BLACK_RULE

    if 'shuffle_seed' not in st.session_state:
        st.session_state.shuffle_seed = None

    if 'workbench' not in st.session_state:
        st.session_state.workbench = _new_workbench()

    if 'census_reports' not in st.session_state:
        st.session_state.census_reports = {}

    if 'comparison' not in st.session_state:
        st.session_state.comparison = None


def _new_workbench() -> Workbench:
    return Workbench(
        white_rule=st.session_state.white_rule,
        black_rule=st.session_state.black_rule,
        shuffle_seed=st.session_state.shuffle_seed,
    )


def get_workbench() -> Workbench:
    """Get the workbench for this session"""
    return st.session_state.workbench


def set_rules(white_rule: str, black_rule: str, shuffle_seed: Optional[int]) -> bool:
    """Change reduction rules or tie-break seed; drops cached results when anything changed"""
    current = (st.session_state.white_rule, st.session_state.black_rule, st.session_state.shuffle_seed)
    if current == (white_rule, black_rule, shuffle_seed):
        return False
    st.session_state.white_rule = white_rule
    st.session_state.black_rule = black_rule
    st.session_state.shuffle_seed = shuffle_seed
    st.session_state.workbench = st.session_state.workbench.with_rules(white_rule, black_rule, shuffle_seed)
    clear_results()
    return True


def store_census(key: str, report: CensusReport):
    """Store a census report under 'mode/source'"""
    st.session_state.census_reports[key] = report


def get_census(key: str) -> Optional[CensusReport]:
    return st.session_state.census_reports.get(key)


def get_census_reports() -> Dict[str, CensusReport]:
    return st.session_state.census_reports


def set_comparison(report: ComparisonReport):
    st.session_state.comparison = report


def get_comparison() -> Optional[ComparisonReport]:
    return st.session_state.comparison


def clear_results():
    """Clear census and comparison results"""
    st.session_state.census_reports = {}
    st.session_state.comparison = None


def session_summary() -> Dict[str, Any]:
    return {
        "white rule": st.session_state.white_rule,
        "black rule": st.session_state.black_rule,
        "shuffle seed": st.session_state.shuffle_seed,
        "census runs": len(st.session_state.census_reports),
    }
