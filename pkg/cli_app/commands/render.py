# cli_app/commands/render.py
import json
import os
from typing import Dict

from cli_app.commands.common import add_threads_argument, load_renderer, resolve_threads, write_json
from src.renderer.pipeline import render_image
from src.renderer.rays import Camera
from src.utils.data_loader import load_poses
from src.utils.errors import InputError
from src.utils.image_io import DEPTH_MAX, write_depth, write_rgb

INTRINSIC_KEYS = ("camera_angle_x", "width", "height", "near", "far")


def add_parser(subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help="자세마다 C, C_vi, α·C_vd, 깊이 이미지 렌더")
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--poses", required=True, help="transforms.json 또는 4x4 행렬 목록 JSON")
    parser.add_argument("--split", default=None, help="매니페스트 형식일 때 사용할 split (예: test)")
    parser.add_argument("--out", required=True)
    parser.add_argument("--camera-angle-x", type=float, default=None)
    parser.add_argument("--resolution", type=int, nargs=2, metavar=("W", "H"), default=None)
    parser.add_argument("--near", type=float, default=None)
    parser.add_argument("--far", type=float, default=None)
    add_threads_argument(parser)


def read_intrinsics(args) -> Dict:
    """플래그 > 자세 파일(매니페스트 형식)의 값. 둘 다 없으면 InputError"""
    intrinsics: Dict = {}
    with open(args.poses, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise InputError(f"자세 파일 JSON 파싱 실패 ({args.poses}): {e}") from e
    if isinstance(data, dict):
        intrinsics.update({k: data[k] for k in INTRINSIC_KEYS if k in data})
    flags = {"camera_angle_x": args.camera_angle_x, "near": args.near, "far": args.far}
    if args.resolution:
        flags["width"], flags["height"] = args.resolution
    intrinsics.update({k: v for k, v in flags.items() if v is not None})
    missing = [k for k in INTRINSIC_KEYS if k not in intrinsics]
    if missing:
        raise InputError(f"카메라 정보가 부족합니다 ({', '.join(missing)}): 플래그로 지정하세요")
    return intrinsics


def run(args) -> int:
    intrinsics = read_intrinsics(args)
    poses = load_poses(args.poses, split=args.split)
    renderer, config = load_renderer(args.checkpoint)
    width, height = int(intrinsics["width"]), int(intrinsics["height"])
    near, far = float(intrinsics["near"]), float(intrinsics["far"])
    depth_scale = far / DEPTH_MAX
    threads = resolve_threads(args)
    os.makedirs(args.out, exist_ok=True)

    print(f"🚀 렌더링: 자세 {len(poses)} 개, {width}x{height}")
    for i, c2w in enumerate(poses):
        camera = Camera.from_fov(width, height, float(intrinsics["camera_angle_x"]), c2w)
        image = render_image(renderer, camera, near, far, threads=threads)
        stem = os.path.join(args.out, f"r_{i:03d}")
        write_rgb(f"{stem}.png", image.rgb)
        write_rgb(f"{stem}_vi.png", image.rgb_vi)
        write_rgb(f"{stem}_vd.png", image.rgb_vd)
        write_depth(f"{stem}_depth.png", image.depth, depth_scale)

    write_json(
        os.path.join(args.out, "render.json"),
        {"poses": args.poses, "count": len(poses), "depth_scale": depth_scale, **intrinsics, "config": config},
    )
    if not renderer.config.use_view_dependent:
        print("⚠️ 시점 의존 분기가 꺼진 체크포인트라 α·C_vd 이미지는 0 입니다")
    print(f"✅ 렌더링 완료: {args.out}")
    return 0
