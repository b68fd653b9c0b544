"""
DDM Matching Dashboard
=======================
Streamlit front end over the matching library and the bench harness.

Pages:
  - Match Explorer: generate (or upload) a workload, run one matcher,
    inspect K, WCT, parallel SBM phase timings and the pairs
  - Benchmark Suite: run a small suite, show raw and aggregated tables
  - Scaling Analysis: speedup and efficiencies from a records CSV

Tables only; the CSV downloads feed any plotting tool.

    streamlit run app.py
"""

import io
import tempfile

import pandas as pd
import streamlit as st

from algorithms import ALGORITHM_CLASSES, create_matcher
from bench import SuiteConfig, compute_scaling, read_records_csv, run_suite_frame
from ddm_config import (BENCH_DEFAULTS, SET_IMPLEMENTATIONS, WORKER_BACKENDS, WORKLOAD_DEFAULTS,
                        configure_logging, default_thread_counts, get_algorithm_config,
                        get_available_algorithms)
from ddm_core import DDMError
from workload import WorkloadConfig, expected_matches, expected_matches_std, generate_workload, load_extents

configure_logging()

st.set_page_config(
    page_title="DDM Matching",
    page_icon="📐",
    layout="wide",
    initial_sidebar_state="expanded"
)


# =============================================================================
# HELPER FUNCTIONS
# =============================================================================

def algorithm_label(code):
    return f"{code} ({get_algorithm_config(code)['name']})"


BACKEND_CHOICES = [None] + list(WORKER_BACKENDS)


def backend_label(backend):
    return "algorithm default" if backend is None else backend


def csv_download(df, filename, key):
    st.download_button("⬇️ Download CSV", df.to_csv(index=False),
                       file_name=filename, mime="text/csv", key=key)


@st.cache_data(show_spinner=False)
def cached_workload(N, alpha, L, seed, dims):
    return generate_workload(WorkloadConfig(N, alpha, L, seed, dims))


def uploaded_extents(upload):
    with tempfile.NamedTemporaryFile('wb', suffix='.txt') as tmp:
        tmp.write(upload.getvalue())
        tmp.flush()
        return load_extents(tmp.name)


# =============================================================================
# SIDEBAR: NAVIGATION
# =============================================================================

st.sidebar.title("📐 DDM Matching")

page_list = ["Match Explorer", "Benchmark Suite", "Scaling Analysis"]
if 'current_page' not in st.session_state:
    st.session_state.current_page = "Match Explorer"

page = st.sidebar.radio(
    "Select Page:",
    page_list,
    index=page_list.index(st.session_state.current_page)
)
st.session_state.current_page = page

st.sidebar.markdown("---")
st.sidebar.markdown("**Algorithms:**")
for info in get_available_algorithms():
    extra = " · output-sensitive" if info['output_sensitive'] else ""
    st.sidebar.markdown(f"- `{info['code']}` {info['name']} · {info['complexity']}{extra} "
                        f"· {info['default_backend']}")


# =============================================================================
# PAGE: MATCH EXPLORER
# =============================================================================

if page == "Match Explorer":
    st.title("🔍 Match Explorer")

    with st.form("match_form"):
        col1, col2, col3 = st.columns(3)
        with col1:
            N = st.number_input("Extents N (even)", min_value=2, value=WORKLOAD_DEFAULTS['N'], step=2)
            alpha = st.number_input("Overlapping degree α", min_value=1e-6, value=WORKLOAD_DEFAULTS['alpha'],
                                    format="%g")
            seed = st.number_input("Seed", min_value=0, value=WORKLOAD_DEFAULTS['seed'])
        with col2:
            algo = st.selectbox("Algorithm", list(ALGORITHM_CLASSES), format_func=algorithm_label)
            mode = st.radio("Mode", ["count", "list"], horizontal=True)
            workers = st.number_input("Workers P", min_value=1, value=1)
        with col3:
            backend = st.selectbox("Worker backend", BACKEND_CHOICES, format_func=backend_label)
            set_impl = st.selectbox("Sweep sets", list(SET_IMPLEMENTATIONS))
            grid_cells = st.number_input("Grid cells G", min_value=1, value=BENCH_DEFAULTS['grid_cells'])
        dims = st.number_input("Dimensions d", min_value=1, max_value=8, value=WORKLOAD_DEFAULTS['dims'])
        upload = st.file_uploader("…or match an extent file", type=['txt'])
        submitted = st.form_submit_button("▶️ Run", use_container_width=True)

    if submitted:
        try:
            if upload is not None:
                S, U = uploaded_extents(upload)
                bounds = None
                st.info(f"Loaded {len(S)} subscriptions and {len(U)} updates (d={S.dims})")
            else:
                cfg = WorkloadConfig(int(N), float(alpha), WORKLOAD_DEFAULTS['L'], int(seed), int(dims))
                S, U = cached_workload(cfg.N, cfg.alpha, cfg.L, cfg.seed, cfg.dims)
                bounds = (0.0, cfg.L)
                st.caption(f"l = {cfg.l:g} · E[K] = {expected_matches(cfg):,.1f} "
                           f"± {expected_matches_std(cfg):,.1f}")

            matcher = create_matcher(algo, backend=backend, set_impl=set_impl,
                                     cell_count=int(grid_cells), bounds=bounds)
            with st.spinner(f"Running {matcher.name}…"):
                report = matcher.run(S, U, mode, int(workers))
        except DDMError as exc:
            st.error(str(exc))
        else:
            col1, col2, col3 = st.columns(3)
            col1.metric("K (matches)", f"{report.count:,}")
            col2.metric("WCT", f"{matcher.last_wct_seconds * 1000:.2f} ms")
            col3.metric("Workers", matcher.last_workers if matcher.parallel else 1)

            if matcher.stats:
                with st.expander("⏱️ Parallel SBM phases"):
                    phases = {k: v for k, v in matcher.stats.items() if k.endswith('_secs')}
                    st.dataframe(pd.DataFrame([phases]), use_container_width=True)
                    st.dataframe(pd.DataFrame({
                        'segment_size': matcher.stats['segment_sizes'],
                        'records_touched': matcher.stats['records_touched'],
                    }), use_container_width=True)
                    st.write(f"Delta elements touched by the coordinator: "
                             f"{matcher.stats.get('delta_elements_touched', 0)}")

            if report.pairs is not None:
                pairs = pd.DataFrame(list(report.pairs), columns=['subscription_id', 'update_id'])
                pairs = pairs.sort_values(['subscription_id', 'update_id']).reset_index(drop=True)
                st.dataframe(pairs.head(10_000), use_container_width=True)
                csv_download(pairs, "pairs.csv", "pairs_csv")


# =============================================================================
# PAGE: BENCHMARK SUITE
# =============================================================================

elif page == "Benchmark Suite":
    st.title("⏱️ Benchmark Suite")

    with st.form("suite_form"):
        algorithms = st.multiselect("Algorithms", list(ALGORITHM_CLASSES), default=['sbm', 'sbm-par'],
                                    format_func=algorithm_label)
        col1, col2 = st.columns(2)
        with col1:
            Ns = st.text_input("N values (comma separated)", "10000,20000")
            alphas = st.text_input("α values", ",".join(f"{a:g}" for a in BENCH_DEFAULTS['alphas']))
            threads = st.multiselect("Worker counts", default_thread_counts(), default=[1])
        with col2:
            reps = st.number_input("Repetitions", min_value=1, value=3)
            seed = st.number_input("Seed", min_value=0, value=WORKLOAD_DEFAULTS['seed'])
            budget = st.number_input("Time budget per run (s, 0 = per-algorithm default)",
                                     min_value=0.0, value=0.0)
        backend = st.selectbox("Worker backend", BACKEND_CHOICES, format_func=backend_label)
        fresh = st.checkbox("Fresh workload per repetition")
        submitted = st.form_submit_button("▶️ Run Suite", use_container_width=True)

    if submitted:
        try:
            config = SuiteConfig(
                algorithms=algorithms,
                Ns=[int(v) for v in Ns.split(',') if v.strip()],
                alphas=[float(v) for v in alphas.split(',') if v.strip()],
                threads=threads or [1],
                reps=int(reps),
                seed=int(seed),
                time_budget_secs=float(budget) or None,
                fresh_seeds=fresh,
                backend=backend,
            )
            with st.spinner("Running suite…"):
                raw, agg, skipped = run_suite_frame(config)
        except (DDMError, ValueError) as exc:
            st.error(str(exc))
        else:
            st.session_state.suite_raw = raw
            st.markdown("### Aggregates")
            st.dataframe(agg, use_container_width=True)
            csv_download(agg, "aggregates.csv", "agg_csv")
            if not skipped.empty:
                st.warning(f"{len(skipped)} combination(s) skipped")
                st.dataframe(skipped, use_container_width=True)
            with st.expander("Raw records"):
                st.dataframe(raw, use_container_width=True)
                csv_download(raw, "records.csv", "raw_csv")


# =============================================================================
# PAGE: SCALING ANALYSIS
# =============================================================================

elif page == "Scaling Analysis":
    st.title("📈 Scaling Analysis")

    upload = st.file_uploader("Records CSV (from `cli.py bench` or the suite page)", type=['csv'])
    records = None
    if upload is not None:
        try:
            records = read_records_csv(io.BytesIO(upload.getvalue()))
        except DDMError as exc:
            st.error(str(exc))
    elif 'suite_raw' in st.session_state:
        st.info("Using the records of the last suite run")
        records = st.session_state.suite_raw

    if records is not None:
        summary, missing = compute_scaling(records)
        st.dataframe(summary, use_container_width=True)
        csv_download(summary, "scaling.csv", "scaling_csv")
        if missing:
            st.warning(f"{len(missing)} cell(s) lack a baseline")
            st.dataframe(pd.DataFrame(missing), use_container_width=True)


# =============================================================================
# FOOTER
# =============================================================================

st.sidebar.markdown("---")
st.sidebar.markdown("**DDM Matching Dashboard**")
st.sidebar.markdown("Counts K, wall-clock time, speedup and efficiency")
