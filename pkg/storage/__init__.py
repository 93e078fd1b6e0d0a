from .artifacts import (
    output_root,
    run_directory,
    save_artifact,
    read_artifact,
    write_manifest,
    read_manifest,
)
