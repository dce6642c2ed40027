//! Abc2dcsvt-style fixture: two steps, four points, one scalar component.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// The openCFS setup block, plus the coordinates file name, run and output
/// elements this tool needs.
pub const CONFIG: &str = r#"<coupling>
  <scatteredData>
    <csvt fileName="./csvt/data.descrip" id="myCSVT">
      <stepValues col="0"/>
      <stepFiles col="1"/>
      <coordinates fileName="points.csv">
        <comp dof="x" col="0"/>
        <comp dof="y" col="1"/>
<!--          <comp dof="z" col="2"/>-->
      </coordinates>
      <quantity name="scatter" id="acouPot" knnLib="Flann">
        <comp col="0"/>
      </quantity>
    </csvt>
  </scatteredData>
  <run quantityId="acouPot" k="4" p="2">
    <targets mesh="square.msh" region="domain" order="2"/>
  </run>
  <output directory="out"/>
</coupling>
"#;

pub const MESH: &str = "# unit square, one quad and its boundary\n\
$nodes\n1 0 0\n2 1 0\n3 1 1\n4 0 1\n\
$elements\n1 quad4 domain 1 2 3 4\n2 line2 bnd 1 2\n3 line2 bnd 2 3\n4 line2 bnd 3 4\n5 line2 bnd 4 1\n";

/// Writes the fixture under `dir` and returns the configuration path.
/// `values` gives the per-point value of each of the two steps.
pub fn write_fixture(dir: &Path, values: [[f64; 4]; 2]) -> PathBuf {
    let csvt = dir.join("csvt");
    fs::create_dir_all(&csvt).unwrap();
    fs::write(csvt.join("data.descrip"), "# time,file\n0.0,step0.csv\n0.001,step1.csv\n").unwrap();
    fs::write(csvt.join("points.csv"), "0.0,0.0\n1.0,0.0\n1.0,1.0\n0.0,1.0\n").unwrap();
    for (step, vals) in values.iter().enumerate() {
        let text: String = vals.iter().map(|v| format!("{v:?}\n")).collect();
        fs::write(csvt.join(format!("step{step}.csv")), text).unwrap();
    }
    fs::write(dir.join("square.msh"), MESH).unwrap();
    let cfg = dir.join("config.xml");
    fs::write(&cfg, CONFIG).unwrap();
    cfg
}

pub fn default_fixture(dir: &Path) -> PathBuf {
    write_fixture(dir, [[0.0, 1.0, 2.0, 3.0], [4.0, 5.0, 6.0, 7.0]])
}

pub fn run_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csvt-couple"))
        .args(args)
        .output()
        .expect("spawn csvt-couple")
}

/// All files under `dir` with their contents, sorted by name.
pub fn snapshot_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}
