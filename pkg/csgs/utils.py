#!/usr/bin/env python3

# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

import hashlib
import importlib
import os
import tempfile
from collections import defaultdict
from typing import Type, Dict, Any, Callable, Union

import numpy as np
import yaml

from csgs import ConfigError


def load_config(config_name: str) -> Dict[str, Any]:
    """
    Load a run configuration. `config_name` is either a path to a YAML file or the name of a file in ./configs
    """
    from csgs import log
    import csgs

    config_file_name = config_name
    if not os.path.isfile(config_file_name):
        config_folder_path = os.path.join(csgs.project_root, "configs")
        config_file_name = os.path.join(config_folder_path, f"{config_name}.yaml")

        if not os.path.isfile(config_file_name):
            supported_configs = []
            if os.path.isdir(config_folder_path):
                for file_name in sorted(os.listdir(config_folder_path)):
                    if file_name.endswith(".yaml"):
                        supported_configs.append(file_name.replace(".yaml", ""))

            log.error(f"{config_name} is neither a file nor a shipped config. Shipped configs: " + ", ".join(supported_configs))
            raise ConfigError("config", f"'{config_name}' not found")

    with open(config_file_name, 'r', encoding='utf-8') as config_file:
        try:
            result = yaml.safe_load(config_file)
        except yaml.YAMLError as e:
            raise ConfigError("config", f"'{config_file_name}' is not valid YAML: {e}")

    if not isinstance(result, dict):
        raise ConfigError("config", f"'{config_file_name}' must hold a mapping at the top level")

    log.debug(f"Loaded config from '{config_file_name}'")

    return to_default_dict(result)


def dump_config(config: Dict[str, Any]) -> str:
    return yaml.safe_dump(to_plain_dict(config), sort_keys=True, default_flow_style=False)


def load_class(class_name: str, module: str) -> Type:
    module = importlib.import_module('.' + module, package='csgs')

    # Load the class dynamically
    loaded_class = getattr(module, class_name, None)
    if not loaded_class:
        raise RuntimeError(f"Class {class_name} not found")

    return loaded_class


def load_callable(reference: str) -> Callable:
    """
    Resolve a 'package.module:attribute' reference to a callable
    """
    module_name, _, attribute = reference.partition(':')
    if not module_name or not attribute:
        raise ValueError(f"'{reference}' is not of the form 'module:attribute'")

    module = importlib.import_module(module_name)
    loaded = getattr(module, attribute, None)
    if not callable(loaded):
        raise ValueError(f"'{reference}' does not name a callable")

    return loaded


def to_default_dict(d):
    if isinstance(d, dict):
        return defaultdict(_return_none, {k: to_default_dict(v) for k, v in d.items()})
    elif isinstance(d, list):
        return [to_default_dict(e) for e in d]
    else:
        return d


def to_plain_dict(d):
    if isinstance(d, dict):
        return {k: to_plain_dict(v) for k, v in d.items()}
    elif isinstance(d, (list, tuple)):
        return [to_plain_dict(e) for e in d]
    else:
        return d


def _return_none():
    return None


def atomic_write(path: str, content: Union[str, bytes]) -> None:
    """
    Write the whole file to a temporary sibling and rename it over `path`
    """
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)

    mode = 'wb' if isinstance(content, bytes) else 'w'
    encoding = None if isinstance(content, bytes) else 'utf-8'

    file_descriptor, temp_path = tempfile.mkstemp(dir=folder, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(file_descriptor, mode, encoding=encoding, newline='' if encoding else None) as temp_file:
            temp_file.write(content)
        os.replace(temp_path, path)
    except BaseException:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise


def content_hash(*parts: Any) -> str:
    digest = hashlib.sha256()
    for part in parts:
        if isinstance(part, np.ndarray):
            digest.update(str(part.shape).encode('utf-8'))
            digest.update(np.ascontiguousarray(part, dtype='<f8').tobytes())
        else:
            digest.update(repr(part).encode('utf-8'))

    return digest.hexdigest()[:16]
