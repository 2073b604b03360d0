//! Subprocess boundary to the optional neural stage.
//!
//! The runner writes one source file per input plus `manifest.json`, runs the
//! configured shell command with `UNSTYLE_NEURAL_MANIFEST` pointing at it, and
//! reads one output file per input back. Outputs are listed in
//! `<output_dir>/manifest.json`; without that file each output is looked up
//! under the input's file name.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

pub const MANIFEST_ENV: &str = "UNSTYLE_NEURAL_MANIFEST";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeuralInput {
    pub id: String,
    pub author: String,
    pub path: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeuralManifest {
    /// Training pairs; absent when pair generation produced none.
    pub pairs: Option<PathBuf>,
    /// Argument vector that prints the shared tokenization of a file as JSON
    /// when the file path is appended.
    pub encoder: Option<Vec<String>>,
    pub inputs: Vec<NeuralInput>,
    pub output_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeuralOutput {
    pub id: String,
    pub path: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeuralOutputManifest {
    pub outputs: Vec<NeuralOutput>,
}

/// Returns one candidate per input, in input order. A missing output becomes
/// an empty candidate, which verification records as a failure.
pub(crate) fn run_neural(
    command: &str,
    dir: &Path,
    pairs: Option<PathBuf>,
    encoder: Option<Vec<String>>,
    inputs: &[(String, String, String)],
) -> Result<Vec<String>, String> {
    let in_dir = dir.join("inputs");
    let out_dir = dir.join("outputs");
    for d in [&in_dir, &out_dir] {
        fs::create_dir_all(d).map_err(|e| format!("{}: {e}", d.display()))?;
    }
    let mut listed = Vec::new();
    for (k, (id, author, code)) in inputs.iter().enumerate() {
        let path = in_dir.join(format!("{k:05}.cpp"));
        fs::write(&path, code).map_err(|e| format!("{}: {e}", path.display()))?;
        listed.push(NeuralInput { id: id.clone(), author: author.clone(), path });
    }
    let manifest = NeuralManifest { pairs, encoder, inputs: listed, output_dir: out_dir.clone() };
    let manifest_path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, text).map_err(|e| format!("{}: {e}", manifest_path.display()))?;

    let status = Command::new("sh")
        .arg("-c")
        .arg(command)
        .current_dir(dir)
        .env(MANIFEST_ENV, &manifest_path)
        .status()
        .map_err(|e| format!("cannot start neural command: {e}"))?;
    if !status.success() {
        return Err(format!("neural command exited with {status}"));
    }

    let out_manifest = out_dir.join("manifest.json");
    let located: Vec<PathBuf> = if out_manifest.exists() {
        let text = fs::read_to_string(&out_manifest).map_err(|e| format!("{}: {e}", out_manifest.display()))?;
        let m: NeuralOutputManifest =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", out_manifest.display()))?;
        manifest
            .inputs
            .iter()
            .map(|i| m.outputs.iter().find(|o| o.id == i.id).map(|o| out_dir.join(&o.path)).unwrap_or_default())
            .collect()
    } else {
        manifest.inputs.iter().map(|i| out_dir.join(i.path.file_name().expect("input files are named"))).collect()
    };
    Ok(located.iter().map(|p| fs::read_to_string(p).unwrap_or_default()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs() -> Vec<(String, String, String)> {
        vec![
            ("a/x".into(), "a".into(), "int main(){}".into()),
            ("b/y".into(), "b".into(), "int main(){return 0;}".into()),
        ]
    }

    #[test]
    fn identity_command_returns_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let got = run_neural("cp inputs/* outputs/", dir.path(), None, None, &inputs()).unwrap();
        assert_eq!(got, vec!["int main(){}", "int main(){return 0;}"]);
        let m: NeuralManifest =
            serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m.inputs.len(), 2);
        assert_eq!(m.inputs[1].id, "b/y");
    }

    #[test]
    fn output_manifest_maps_ids_and_missing_outputs_are_empty() {
        let dir = tempfile::tempdir().unwrap();
        let cmd = r#"echo 'int main(){return 1;}' > outputs/q.cpp && echo '{"outputs":[{"id":"b/y","path":"q.cpp"}]}' > outputs/manifest.json"#;
        let got = run_neural(cmd, dir.path(), None, None, &inputs()).unwrap();
        assert_eq!(got, vec!["".to_string(), "int main(){return 1;}\n".to_string()]);
    }

    #[test]
    fn failing_command_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(run_neural("exit 3", dir.path(), None, None, &inputs()).is_err());
    }
}
