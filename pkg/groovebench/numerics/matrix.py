"""행렬 유틸리티 및 GRVM 바이너리 입출력

GRVM 형식:
    4바이트 매직 b'GRVM', 버전 바이트 0x01,
    u32 LE rows, u32 LE cols, rows*cols 개의 LE float32 (row-major)
"""
import os
import struct
import logging
from typing import Union

import numpy as np

from groovebench.exceptions import ShapeError, FormatError, ContractError

logger = logging.getLogger(__name__)

# 코어 연산은 float64, 디스크 저장은 float32
Matrix = np.ndarray

GRVM_MAGIC = b'GRVM'
GRVM_VERSION = 1
_HEADER = struct.Struct('<4sBII')


def as_matrix(data, name: str = 'matrix') -> Matrix:
    """2차원 float64 행렬로 변환 (1차원은 행 벡터)"""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ShapeError(f"{name}: 2차원 행렬이어야 합니다 (ndim={arr.ndim})")
    return arr


def check_finite(matrix: Matrix, name: str = 'matrix') -> Matrix:
    if not np.all(np.isfinite(matrix)):
        raise ContractError(f"{name}: 유한하지 않은 값이 포함되어 있습니다")
    return matrix


def check_width(matrix: Matrix, width: int, name: str = 'matrix'):
    if matrix.ndim != 2 or matrix.shape[1] != width:
        raise ShapeError(f"{name}: 열 수 {width}이(가) 필요하지만 {matrix.shape}을(를) 받았습니다")


def write_grvm(path: Union[str, os.PathLike], matrix) -> None:
    """행렬을 GRVM 파일로 저장"""
    arr = as_matrix(matrix)
    rows, cols = arr.shape
    with open(path, 'wb') as f:
        f.write(_HEADER.pack(GRVM_MAGIC, GRVM_VERSION, rows, cols))
        f.write(arr.astype('<f4').tobytes(order='C'))


def read_grvm(path: Union[str, os.PathLike]) -> Matrix:
    """GRVM 파일을 float64 행렬로 로드"""
    with open(path, 'rb') as f:
        header = f.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise FormatError(f"{path}: 헤더가 잘렸습니다")
        magic, version, rows, cols = _HEADER.unpack(header)
        if magic != GRVM_MAGIC:
            raise FormatError(f"{path}: 잘못된 매직 {magic!r}")
        if version != GRVM_VERSION:
            raise FormatError(f"{path}: 지원하지 않는 버전 {version}")
        payload = f.read()

    expected = rows * cols * 4
    if len(payload) != expected:
        raise FormatError(f"{path}: 데이터 크기 {len(payload)}바이트, 기대값 {expected}바이트")

    data = np.frombuffer(payload, dtype='<f4').astype(np.float64)
    return data.reshape(rows, cols)
