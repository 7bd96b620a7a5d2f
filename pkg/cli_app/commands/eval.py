# cli_app/commands/eval.py
import math
import os

from cli_app.commands.common import add_threads_argument, load_renderer, resolve_threads
from src.evalkit.glass_surface import DEFAULT_THRESHOLD
from src.evalkit.report import evaluate_model
from src.utils.data_loader import load_dataset

POINTS_NAME = "glass_points.xyz"


def add_parser(subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help="테스트 뷰 PSNR/SSIM 과 유리 표면 오차")
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--dataset", required=True)
    parser.add_argument("--out", required=True, help="report.json 출력 디렉터리")
    parser.add_argument("--split", default="test", choices=["test", "val", "train"])
    parser.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD, help="유리 포인트 임계값 (cm)")
    parser.add_argument("--grids", action="store_true", help="gt | 렌더 | α·C_vd | C_vi | 깊이 비교 이미지 저장")
    parser.add_argument("--float-metrics", action="store_true", help="8비트 양자화 없이 지표 계산")
    add_threads_argument(parser)


def run(args) -> int:
    dataset = load_dataset(args.dataset)
    renderer, config = load_renderer(args.checkpoint)
    print(f"🚀 평가: {args.split} 뷰 {len(dataset.split(args.split))} 장")

    report, cloud = evaluate_model(
        renderer,
        dataset,
        split=args.split,
        threshold=args.threshold,
        threads=resolve_threads(args),
        grid_dir=os.path.join(args.out, "grids") if args.grids else None,
        quantized=not args.float_metrics,
        progress=True,
        config={"checkpoint": args.checkpoint, "dataset": args.dataset, "model": config},
    )
    path = report.save(args.out)
    cloud.save_xyz(os.path.join(args.out, POINTS_NAME))

    psnr_text = "inf" if math.isinf(report.mean_psnr) else f"{report.mean_psnr:.3f}"
    print(f"✅ 평균 PSNR {psnr_text} dB, SSIM {report.mean_ssim:.4f}")
    summary = report.to_dict()
    if summary["mean_highlight_iou"] is not None:
        print(
            f"✅ 반사 하이라이트 IoU {summary['mean_highlight_iou']:.3f}, "
            f"에너지 비율 {summary['mean_highlight_energy']:.3f}"
        )
    if report.surface is not None:
        print(f"✅ 유리 표면 오차 {report.surface['mean']:.4f} cm (포인트 {report.point_count} 개)")
    elif not dataset.has_glass_truth:
        print("⚠️ 정답 유리판 정보가 없어 표면 지표를 생략했습니다")
    else:
        print(f"⚠️ 임계값 {args.threshold} 를 넘는 유리 포인트가 없습니다")
    print(f"✅ 보고서: {path}")
    return 0
