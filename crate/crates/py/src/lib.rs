use pyo3::prelude::*;

#[pymodule]
fn npproc_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
