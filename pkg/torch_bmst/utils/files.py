import json
from pathlib import Path

import yaml

import torch_bmst
from torch_bmst.errors import InvalidPlanError


# get paths
def get_root_path():
    path = Path(torch_bmst.__path__[0]).resolve()
    return path


def get_data_path():
    path = get_root_path() / 'data'
    return path


def get_configs_path():
    path = get_data_path() / 'configs'
    return path


def load_yaml(filename):
    # JSON is a subset of YAML, so this reads both config formats
    with open(filename, 'r') as stream:
        try:
            config = yaml.safe_load(stream)
        except yaml.YAMLError as exc:
            raise InvalidPlanError(f'[load_yaml]: cannot parse {filename}: {exc}') from exc
    if config is None:
        return {}
    if not isinstance(config, dict):
        raise InvalidPlanError(f'[load_yaml]: {filename} must contain a mapping, got {type(config).__name__}')
    return config


def load_default_config(name):
    path = get_configs_path() / f'{name}.yaml'
    if not path.exists():
        return {}
    return load_yaml(path)


def _to_builtin(obj):
    # numpy scalars and small tensors
    if hasattr(obj, 'tolist'):
        return obj.tolist()
    raise TypeError(f'[dump_json]: cannot serialize {type(obj).__name__}')


def dump_json(obj, filename):
    filename = Path(filename)
    filename.parent.mkdir(parents=True, exist_ok=True)
    with open(filename, 'w') as f:
        json.dump(obj, f, indent=2, sort_keys=True, default=_to_builtin)
        f.write('\n')
    return filename
