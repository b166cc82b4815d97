from torch_bmst.cli.config import RunConfig, resolve_config, write_effective_config
