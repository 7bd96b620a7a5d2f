# cli_app/commands/extract_glass.py
import os

import numpy as np

from cli_app.commands.common import add_threads_argument, load_renderer, resolve_threads
from src.evalkit.glass_surface import DEFAULT_THRESHOLD, GlassPointCollector, surface_error
from src.evalkit.report import write_point_cloud_html
from src.renderer.pipeline import render_image
from src.utils.data_loader import load_dataset
from src.utils.errors import DatasetError


def add_parser(subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help="학습된 모델에서 유리 표면 포인트 클라우드 추출")
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--dataset", required=True, help="광선을 만들 카메라가 있는 데이터셋")
    parser.add_argument("--split", default="test", choices=["test", "val", "train"])
    parser.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD, help="‖w·Δx‖ 임계값 (cm)")
    parser.add_argument("--out", required=True, help="XYZ 출력 경로")
    parser.add_argument("--html", default=None, help="plotly 3D 산점도 HTML 경로")
    add_threads_argument(parser)


def run(args) -> int:
    dataset = load_dataset(args.dataset, load_images=False)
    frames = dataset.split(args.split)
    if not frames:
        raise DatasetError(f"'{args.split}' split 이 비어 있습니다: {dataset.root}")
    renderer, _ = load_renderer(args.checkpoint)
    collector = GlassPointCollector(args.threshold)
    threads = resolve_threads(args)

    print(f"🚀 유리 포인트 추출: 뷰 {len(frames)} 장, 임계값 {args.threshold} cm")
    for frame in frames:
        camera = dataset.camera(frame)
        render_image(renderer, camera, dataset.near, dataset.far, threads=threads, on_chunk=collector)
        collector.next_view(camera.width * camera.height)

    cloud = collector.cloud()
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    cloud.save_xyz(args.out)
    print(f"✅ 포인트 {len(cloud)} 개 저장: {args.out} (평균 ‖w·Δx‖ {collector.mean_magnitude:.5f})")

    if len(cloud) and dataset.has_glass_truth:
        error = surface_error(cloud, dataset.glass_slabs)
        print(f"✅ 유리 표면 오차 {error.mean:.4f} cm (중앙값 {error.median:.4f}, RMS {error.rms:.4f})")
    elif not len(cloud):
        print("⚠️ 임계값을 넘는 포인트가 없습니다")

    if args.html:
        truth = dataset.glass_points()
        write_point_cloud_html(args.html, cloud, truth if truth is not None else np.zeros((0, 3)))
        print(f"✅ 3D 산점도: {args.html}")
    return 0
