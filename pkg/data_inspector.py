import os
import sys

import numpy as np
import pandas as pd

from src.utils.data_loader import read_manifest
from src.utils.errors import DatasetError


def frame_table(manifest: dict, root: str) -> pd.DataFrame:
    """프레임별 split, 카메라 위치, 거리, 파일 존재 여부"""
    rows = []
    for frame in manifest.get("frames", []):
        c2w = np.asarray(frame["transform_matrix"], dtype=np.float64)
        position = c2w[:3, 3]
        rows.append(
            {
                "file_path": frame["file_path"],
                "split": frame.get("split", "train"),
                "x": position[0],
                "y": position[1],
                "z": position[2],
                "distance": float(np.linalg.norm(position)),
                "exists": os.path.exists(os.path.join(root, frame["file_path"])),
                "has_depth": "depth_path" in frame,
            }
        )
    return pd.DataFrame(rows)


def inspect_dataset(path="data/slab_checker"):
    """데이터셋 디렉터리의 구조를 확인"""

    print("📊 데이터셋 구조 분석")
    print("=" * 60)

    try:
        manifest = read_manifest(path)
    except DatasetError as e:
        print(f"❌ {e}")
        return None

    root = path if os.path.isdir(path) else os.path.dirname(path)
    table = frame_table(manifest, root)

    print(f"\n📁 {path}")
    print(f"   해상도: {manifest.get('width')}x{manifest.get('height')}")
    print(f"   camera_angle_x: {manifest.get('camera_angle_x')}")
    print(f"   near/far: {manifest.get('near')} / {manifest.get('far')} ({manifest.get('units', '?')})")
    slabs = (manifest.get("ground_truth") or {}).get("slabs", [])
    print(f"   유리판 수: {len(slabs)}")
    if manifest.get("truncated_rays"):
        print(f"   ⚠️ 잘린 광선: {manifest['truncated_rays']}")

    if table.empty:
        print("   ❌ 프레임이 없습니다")
        return table

    summary = table.groupby("split").agg(
        views=("file_path", "count"),
        missing=("exists", lambda s: int((~s).sum())),
        distance_mean=("distance", "mean"),
        distance_std=("distance", "std"),
    )
    print("\n   split 요약:")
    print(summary.to_string())

    print("\n" + "=" * 60)
    print("📋 분석 완료!")
    return table


if __name__ == "__main__":
    inspect_dataset(sys.argv[1] if len(sys.argv) > 1 else "data/slab_checker")
