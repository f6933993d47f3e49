"""YAML 설정 파일 읽기 / manifest 쓰기 (strictyaml)"""
import logging
from typing import Any, Dict

import numpy as np
import strictyaml

from groovebench.exceptions import FormatError

logger = logging.getLogger(__name__)


def _is_empty(value: Any) -> bool:
    if value is None:
        return True
    return isinstance(value, (dict, list, tuple, np.ndarray)) and len(value) == 0


def _plain(value: Any) -> Any:
    """
    strictyaml이 직렬화할 수 있는 기본 타입으로

    None과 빈 리스트/매핑은 생략된다 (스키마 없는 직렬화가 빈 컬렉션을 받지 않음).
    """
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items() if not _is_empty(v)}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    return str(value)


def read_config(path) -> Dict[str, Any]:
    """
    YAML 설정 파일을 dict로

    스칼라는 문자열로 들어오며, 타입 변환은 pydantic 모델이 맡는다.
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
        if not text.strip():
            return {}
        data = strictyaml.load(text).data
    except strictyaml.YAMLError as e:
        raise FormatError(f"{path}: YAML 파싱 실패 - {e}")
    if not isinstance(data, dict):
        raise FormatError(f"{path}: 최상위는 key: value 매핑이어야 합니다")
    return data


def write_manifest(path, data: Dict[str, Any]) -> None:
    document = strictyaml.as_document(_plain(data))
    with open(path, 'w', encoding='utf-8') as f:
        f.write(document.as_yaml())


def merge_options(defaults: Dict[str, Any], file_values: Dict[str, Any], flags: Dict[str, Any]) -> Dict[str, Any]:
    """기본값 < 설정 파일 < CLI 플래그 (None 플래그는 무시)"""
    merged = dict(defaults)
    merged.update(file_values or {})
    merged.update({k: v for k, v in (flags or {}).items() if v is not None})
    return merged
