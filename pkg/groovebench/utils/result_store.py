"""벤치마크 셀 결과 저장소 - 셀 하나당 JSON 파일 하나"""
import hashlib
import json
import logging
import os
from typing import Dict, Iterator, Optional

logger = logging.getLogger(__name__)


class ResultStore:
    """셀 키(md5 16자리)로 주소가 정해지는 결과 디렉토리"""

    def __init__(self, directory: str):
        self.directory = directory
        os.makedirs(os.path.join(directory, 'cells'), exist_ok=True)

    @staticmethod
    def cell_key(setting: str, learner: str, aligner: str, fold: int, seed: int) -> str:
        """셀 식별자 정규화 후 해시"""
        ident = f"{setting}|{learner}|{aligner}|{fold}|{seed}"
        return hashlib.md5(ident.encode()).hexdigest()[:16]  # 16자리만 사용

    def path(self, key: str) -> str:
        return os.path.join(self.directory, 'cells', f"{key}.json")

    def has(self, key: str) -> bool:
        return os.path.exists(self.path(key))

    def load(self, key: str) -> Optional[Dict]:
        if not self.has(key):
            return None
        with open(self.path(key), 'r', encoding='utf-8') as f:
            return json.load(f)

    def save(self, key: str, record: Dict) -> None:
        tmp = self.path(key) + '.tmp'
        with open(tmp, 'w', encoding='utf-8') as f:
            json.dump(record, f, sort_keys=True, indent=2, ensure_ascii=False)
        os.replace(tmp, self.path(key))

    def records(self) -> Iterator[Dict]:
        """저장된 셀을 키 순서대로"""
        cells = os.path.join(self.directory, 'cells')
        for name in sorted(os.listdir(cells)):
            if name.endswith('.json'):
                with open(os.path.join(cells, name), 'r', encoding='utf-8') as f:
                    yield json.load(f)
