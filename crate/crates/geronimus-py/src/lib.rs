use pyo3::prelude::*;

#[pymodule]
fn geronimus_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
