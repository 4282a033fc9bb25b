import streamlit as st
import logging
from typing import Optional

from utils.census import PAPER_MODE, RIBBON_MODE
from utils.config import settings
from utils.errors import MapError
from utils.golden import parse_correspondence, relabel_tables
from utils.orders import BLACK_RULES, WHITE_RULES
from utils.reports import (
    catalog_frame, dump_json, genus_frame, histogram_frame, incidence_dot, render_table, table_frame, select_table
)
from utils.session import (
    init_session_state, get_workbench, set_rules, store_census, get_census_reports,
    set_comparison, get_comparison, clear_results, session_summary
)

# Set up logging
logging.basicConfig(level=settings.LOG_LEVEL)
logger = logging.getLogger(__name__)

# Page setup
st.set_page_config(
    page_title="Map Workbench",
    page_icon="🗺️",
    layout="wide",
    initial_sidebar_state="expanded"
)


def setup_sidebar():
    """Setup the sidebar with pipeline settings"""
    st.sidebar.title("Settings")

    white_rules = sorted(WHITE_RULES)
    black_rules = sorted(BLACK_RULES)
    white_rule = st.sidebar.selectbox(
        "White reduction rule", white_rules, index=white_rules.index(st.session_state.white_rule)
    )
    black_rule = st.sidebar.selectbox(
        "Black reduction rule", black_rules, index=black_rules.index(st.session_state.black_rule)
    )
    shuffle = st.sidebar.checkbox("Randomize Eulerian tie-breaks", value=st.session_state.shuffle_seed is not None)
    seed: Optional[int] = None
    if shuffle:
        seed = int(st.sidebar.number_input("Seed", min_value=0, value=st.session_state.shuffle_seed or 0, step=1))
    if set_rules(white_rule, black_rule, seed):
        st.sidebar.success("Settings changed; results will be recomputed")

    st.sidebar.markdown("---")
    st.sidebar.subheader("Session")
    for key, value in session_summary().items():
        st.sidebar.text(f"{key}: {value}")

    if st.sidebar.button("Clear Results"):
        clear_results()
        st.rerun()


def show_catalogs():
    bench = get_workbench()
    with st.spinner("Enumerating maps..."):
        m33, m446 = bench.m33(), bench.m446()
        pairing = bench.pairing()
    col1, col2, col3 = st.columns(3)
    col1.metric("M33 classes", len(m33), delta=len(m33) - settings.EXPECTED_M33 or None)
    col2.metric("M(4,4,6) classes", len(m446), delta=len(m446) - settings.EXPECTED_M446 or None)
    col3.metric("Pairs / singletons", f"{len(pairing.pairs)} / {len(pairing.singletons)}")

    kind = st.radio("Catalog", ["m33", "m446"], horizontal=True)
    catalog = bench.catalog(kind)
    st.dataframe(catalog_frame(catalog), use_container_width=True, hide_index=True)

    class_id = st.selectbox("Class", catalog.ids())
    if class_id:
        with st.expander("Rotation system"):
            st.code(dump_json(catalog.get(class_id).to_dict()), language="json")


def show_tables():
    bench = get_workbench()
    which = st.radio("Table", [1, 2, 3, 4], horizontal=True,
                     format_func=lambda n: {1: "1 white raw", 2: "2 black raw", 3: "3 white reduced", 4: "4 black reduced"}[n])
    source = st.radio("Source", ["computed", "golden"], horizontal=True)
    mapping_file = st.file_uploader("Correspondence CSV (our_id,label)", type=["csv", "txt"])

    try:
        if source == "golden":
            golden = bench.golden()
            tables = golden.raw if which in (1, 2) else golden.reduced
        else:
            with st.spinner("Computing words..."):
                tables = bench.raw_tables() if which in (1, 2) else bench.reduced_tables()
            if mapping_file is not None:
                correspondence = parse_correspondence(
                    mapping_file.getvalue().decode("utf-8"), bench.m33().ids(), bench.m446().ids()
                )
                tables = relabel_tables(tables, correspondence)
    except MapError as e:
        logger.error(f"Error building table {which}: {str(e)}")
        st.error(f"Error: {str(e)}")
        return

    frame = table_frame(select_table(tables, which))
    st.dataframe(frame, use_container_width=True, hide_index=True)
    st.caption(f"{len(frame)} rows, {int(frame['length'].sum())} letters")
    st.download_button("Download CSV", render_table(tables, which, "csv"), file_name=f"table{which}.csv")


def show_census():
    bench = get_workbench()
    col1, col2, col3 = st.columns(3)
    mode = col1.selectbox("Mode", [PAPER_MODE, RIBBON_MODE])
    source = col2.selectbox("Source", ["golden", "computed"])
    jobs = int(col3.number_input("Workers", min_value=1, max_value=32, value=settings.DEFAULT_JOBS))

    if st.button("Run census"):
        with st.spinner(f"Tracing every resolution ({mode}, {source})..."):
            try:
                report = bench.census(mode=mode, source=source, jobs=jobs)
                store_census(f"{mode}/{source}", report)
            except MapError as e:
                logger.error(f"Error in census: {str(e)}")
                st.error(f"Error: {str(e)}")

    for key, report in sorted(get_census_reports().items()):
        st.subheader(key)
        c1, c2, c3, c4 = st.columns(4)
        c1.metric("Fork sites", report.fork_count)
        c2.metric("Choice vectors", report.total_vectors)
        c3.metric("Face counts", ", ".join(map(str, report.face_counts)) or "-")
        c4.metric("Parity violations", report.parity_violations)
        if report.obstructions:
            st.warning(f"{len(report.obstructions)} pairs have unequal two-sided counts; no dart matching exists")
        if report.face_histogram:
            st.caption(report.claim_summary())
            frame = histogram_frame(report)
            st.bar_chart(frame.set_index("faces")["choice vectors"])
            st.dataframe(frame, hide_index=True)
        with st.expander("Genus by edge-count convention"):
            st.dataframe(genus_frame(report), hide_index=True)
        with st.expander("Fork sites"):
            st.json([f.to_dict() for f in report.forks])
        if report.mismatches:
            with st.expander(f"Two-sided count mismatches ({len(report.mismatches)})"):
                st.json(report.to_dict()["mismatches"])


def show_compare():
    bench = get_workbench()
    mapping_file = st.file_uploader("Fixed correspondence (optional)", type=["csv", "txt"], key="compare_map")
    census_mode = st.selectbox("Census on both table sets", ["none", PAPER_MODE, RIBBON_MODE], key="compare_census")
    if st.button("Compare with golden tables"):
        with st.spinner("Searching a correspondence..."):
            try:
                correspondence = None
                if mapping_file is not None:
                    correspondence = parse_correspondence(
                        mapping_file.getvalue().decode("utf-8"), bench.m33().ids(), bench.m446().ids()
                    )
                set_comparison(bench.compare(
                    correspondence, census_mode=None if census_mode == "none" else census_mode
                ))
            except MapError as e:
                logger.error(f"Error in comparison: {str(e)}")
                st.error(f"Error: {str(e)}")

    report = get_comparison()
    if report is None:
        st.info("No comparison yet.")
        return
    st.markdown(f"**Correspondence level:** {report.bijection.level}")
    for line in report.bijection.trace:
        st.text(line)
    for stage in report.stages:
        st.subheader(f"{stage.stage} words")
        st.json(stage.summary())
        differing = [r.to_dict() for r in stage.differing()]
        if differing:
            st.dataframe(differing, hide_index=True)
    if report.figures:
        st.subheader("Printed fork cases")
        st.dataframe([f.to_dict() for f in report.figures], hide_index=True)
    if report.census is not None:
        st.subheader("Census")
        st.markdown(report.census.summary())
        census = report.census.to_dict()
        st.json(census["face_histogram"])
        st.dataframe(
            [{"convention": r["convention"], "computed": r["computed"]["genus"], "golden": r["golden"]["genus"]}
             for r in census["genus"]],
            hide_index=True,
        )
        if report.census.only_computed or report.census.only_golden:
            st.json(census["forks"])
    st.subheader("Expectations")
    st.dataframe([e.to_dict() for e in report.expectations], hide_index=True)
    st.download_button("Correspondence CSV", report.bijection.correspondence.to_csv(), file_name="correspondence.csv")


def show_export():
    bench = get_workbench()
    source = st.radio("Incidence source", ["golden", "computed"], horizontal=True, key="export_source")
    dot = incidence_dot(bench.incidence(source))
    st.graphviz_chart(dot)
    st.download_button("Download DOT", dot, file_name=f"incidence_{source}.dot")


def main():
    """Main application function"""
    init_session_state()
    setup_sidebar()

    st.title("Map Workbench 🗺️")
    st.markdown(
        "Plane maps with 3 vertices and 3 faces, their quadrangulations, the M(4,4,6) maps "
        "obtained by deleting a separating edge, and the genus of the bipartite ribbon graph they form."
    )
    tabs = st.tabs(["Catalogs", "Tables", "Census", "Compare", "Export"])
    with tabs[0]:
        show_catalogs()
    with tabs[1]:
        show_tables()
    with tabs[2]:
        show_census()
    with tabs[3]:
        show_compare()
    with tabs[4]:
        show_export()


if __name__ == "__main__":
    main()
