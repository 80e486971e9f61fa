fn main() {
    // Bake the working-tree description into result provenance columns.
    println!("cargo:rerun-if-env-changed=STEERSIM_BUILD");
    if std::env::var("STEERSIM_BUILD").is_ok() {
        return;
    }
    if let Ok(out) = std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
    {
        if out.status.success() {
            let desc = String::from_utf8_lossy(&out.stdout);
            let desc = desc.trim();
            if !desc.is_empty() {
                println!("cargo:rustc-env=STEERSIM_BUILD={desc}");
            }
        }
    }
}
