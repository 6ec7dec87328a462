import streamlit as st
import pandas as pd

from cegarkit.abstraction import build_abstract_model, make_abstraction, render_abstract_model
from cegarkit.checker import Property, check_formula_scope, check_property
from cegarkit.config import AnalysisOptions, Detector, LastMode
from cegarkit.counterexample import parse_path, render_concrete, render_path, validate_counterexample
from cegarkit.errors import CegarKitError
from cegarkit.model import parse_model, sample_text
from cegarkit.oracle import concretize
from cegarkit.refine import cegar, run_detector
from cegarkit.report import classes_frame, positions_frame, trace_frame

st.set_page_config(layout="wide")
st.markdown("# 🔎 Spurious Counterexample Explorer<br><span style='color:gray'>Abstraction, detection and refinement on explicit-state models</span>", unsafe_allow_html=True)

# Sidebar
st.sidebar.header("🧭 Explorer Settings")
uploaded_file = st.sidebar.file_uploader("Upload model file (.model, .txt)", type=["model", "txt"])
sample = st.sidebar.selectbox("Bundled sample", ["tl", "f12"], disabled=uploaded_file is not None)

# Determine source
try:
    if uploaded_file:
        model = parse_model(uploaded_file.getvalue().decode("utf-8"))
        st.sidebar.success("✅ Using the uploaded model.")
    else:
        model = parse_model(sample_text(sample))
        st.sidebar.info(f"📁 Using the bundled `{sample}` sample.")
except (CegarKitError, UnicodeDecodeError) as e:
    st.error(f"❌ Could not load the model.\n\nError: {e}")
    st.stop()

default_hidden = {"tl": ["color"], "f12": ["pos"]}.get(sample, []) if not uploaded_file else []
invisible = st.sidebar.multiselect("Invisible variables", list(model.var_names), default=default_hidden)
default_prop = {"tl": "GF state=stop", "f12": "AG !(grp=d)"}.get(sample, "") if not uploaded_file else ""
prop_text = st.sidebar.text_input("Property (AG φ or GF φ)", value=default_prop)
detector = st.sidebar.selectbox("Detector", [d.value for d in Detector])
strict = st.sidebar.checkbox("Strict last state (deadlocks only)", value=False)
workers = st.sidebar.slider("Workers", 1, 8, 1)
path_text = st.sidebar.text_input("Counterexample override (finite: ... / lasso: ... ( ... ))", value="")

options = AnalysisOptions(
    detector=Detector(detector),
    last_mode=LastMode.PAPER_STRICT if strict else LastMode.UNCONSTRAINED,
    workers=workers,
)

# ──────────────────────────────────────────────
# 📌 Model Summary
st.markdown("## 📌 Model Summary", unsafe_allow_html=True)
amap = make_abstraction(model, invisible)
abstract = build_abstract_model(model, amap)
col1, col2, col3, col4 = st.columns(4)
col1.metric("Concrete states", len(model.states))
col2.metric("Transitions", len(model.transitions))
col3.metric("Deadlocks", len(model.deadlocks))
col4.metric("Abstract states", len(amap))

with st.expander("🧩 Abstract classes"):
    st.dataframe(classes_frame(amap), use_container_width=True)
with st.expander("📄 Abstract model dump"):
    st.code(render_abstract_model(abstract), language="text")

# ──────────────────────────────────────────────
# 🧪 Counterexample
st.markdown("## 🧪 Counterexample", unsafe_allow_html=True)
try:
    prop = Property.parse(prop_text)
    check_formula_scope(abstract, prop.formula)
    if path_text.strip():
        ce = parse_path(path_text)
        validate_counterexample(abstract, ce)
    else:
        ce = check_property(abstract, prop)
except CegarKitError as e:
    st.error(f"❌ {e}")
    st.stop()

if ce is None:
    st.success(f"✅ `{prop}` holds on the abstract model, so it holds concretely.")
    st.stop()

st.code(render_path(ce), language="text")

report = run_detector(model, amap, ce, options)
conc = concretize(model, amap, ce)

col1, col2, col3 = st.columns(3)
col1.metric(f"{report.detector} verdict", report.verdict.value)
col2.metric("Oracle verdict", conc.verdict.value)
col3.metric("Failure position", "-" if report.failure_index is None else report.failure_index)
if report.verdict != conc.verdict:
    st.warning("⚠️ The detector and the exact oracle disagree on this counterexample.")
if conc.real:
    st.caption(f"Concrete witness: {render_concrete(conc.path or conc.stem, conc.cycle)}")

# ──────────────────────────────────────────────
# 📊 Per-position analysis
st.markdown("## 📊 In / Out per Position", unsafe_allow_html=True)
positions = positions_frame(model, amap, ce, options.last_mode)
st.dataframe(positions, use_container_width=True)
st.caption("Failure positions have disjoint In and Out sets. Weight = EIn × EOut.")

if report.partition is not None:
    st.markdown(f"### ✂️ Partition of `{report.failure_state}`", unsafe_allow_html=True)
    partition = pd.DataFrame({
        "set": ["dead", "bad", "isolated"],
        "states": [", ".join(model.ordered(s)) for s in (report.partition.dead, report.partition.bad, report.partition.isolated)],
        "size": [len(report.partition.dead), len(report.partition.bad), len(report.partition.isolated)],
    })
    st.dataframe(partition, use_container_width=True)

with st.expander("📈 Detector statistics"):
    stats = report.stats
    st.write({
        "sequence length": stats.sequence_length,
        "positions checked": stats.positions_checked,
        "fixpoint stages": stats.fixpoint_iterations,
        "visit order": stats.visit_order,
        "unwind": stats.unwind,
        "image sizes": stats.image_sizes,
    })

# ──────────────────────────────────────────────
# 🔁 CEGAR
st.markdown("## 🔁 Abstraction Refinement Loop", unsafe_allow_html=True)
max_iter = st.slider("Iteration budget", 1, 100, 20)
if st.button("Run CEGAR"):
    try:
        result = cegar(model, invisible, prop, options.with_(max_iterations=max_iter))
    except CegarKitError as e:
        st.error(f"❌ {e}")
        st.stop()
    st.metric("Outcome", result.outcome.value)
    st.dataframe(trace_frame(result), use_container_width=True)
    if result.witness is not None:
        w = result.witness
        st.caption(f"Concrete witness: {render_concrete(w.path or w.stem, w.cycle)}")
    with st.expander("🧩 Final abstract classes"):
        st.dataframe(classes_frame(result.amap), use_container_width=True)
