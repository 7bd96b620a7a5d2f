# cli_app/commands/generate.py
import json

from cli_app.commands.common import add_threads_argument, resolve_threads
from src.oracle.presets import PRESETS, Trajectory, build_preset, default_trajectory
from src.oracle.scene import SceneSpec
from src.oracle.tracer import DEFAULT_MAX_TRAVERSALS
from src.utils.config import dataclass_from_dict, load_config_file, merge_config
from src.utils.data_generator import DatasetGenerator
from src.utils.errors import InputError


def add_parser(subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help="오라클 추적기로 데이터셋 생성")
    parser.add_argument("--preset", default="slab-checker", choices=sorted(PRESETS), help="장면 프리셋")
    parser.add_argument("--scene-file", default=None, help="장면 JSON (지정하면 프리셋 대신 사용)")
    parser.add_argument("--config", default=None, help="설정 JSON ({\"generate\": {...}, \"trajectory\": {...}})")
    parser.add_argument("--counts", type=int, nargs=3, metavar=("TRAIN", "TEST", "VAL"), default=None)
    parser.add_argument("--resolution", type=int, nargs=2, metavar=("W", "H"), default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--max-traversals", type=int, default=None)
    parser.add_argument("--out", required=True, help="출력 디렉터리")
    add_threads_argument(parser)


def _load_scene(args) -> SceneSpec:
    if not args.scene_file:
        return build_preset(args.preset)
    try:
        with open(args.scene_file, encoding="utf-8") as f:
            return SceneSpec.from_dict(json.load(f))
    except json.JSONDecodeError as e:
        raise InputError(f"장면 JSON 파싱 실패 ({args.scene_file}): {e}") from e
    except (KeyError, TypeError) as e:
        raise InputError(f"장면 파일 형식이 잘못되었습니다 ({args.scene_file}): {e}") from e


def run(args) -> int:
    file_config = load_config_file(args.config)
    settings = merge_config(
        {"counts": [40, 8, 8], "resolution": [64, 64], "seed": 7, "max_traversals": DEFAULT_MAX_TRAVERSALS},
        file_config.get("generate"),
        {
            "counts": args.counts,
            "resolution": args.resolution,
            "seed": args.seed,
            "max_traversals": args.max_traversals,
        },
    )
    if min(settings["resolution"]) < 1:
        raise InputError(f"해상도는 1 이상이어야 합니다: {settings['resolution']}")

    scene = _load_scene(args)
    trajectory = default_trajectory(args.preset if not args.scene_file else "")
    if file_config.get("trajectory"):
        trajectory = dataclass_from_dict(Trajectory, merge_config(trajectory.to_dict(), file_config["trajectory"]))

    print(f"🚀 데이터셋 생성: {scene.name} → {args.out}")
    generator = DatasetGenerator(
        scene, trajectory, random_seed=settings["seed"], max_traversals=settings["max_traversals"]
    )
    result = generator.generate(
        args.out,
        counts=tuple(settings["counts"]),
        resolution=tuple(settings["resolution"]),
        threads=resolve_threads(args),
        progress=True,
        config_echo={"resolution": list(settings["resolution"])},
    )
    if result.truncated_rays:
        print(f"⚠️ 통과 한도로 잘린 광선: {result.truncated_rays}")
    print(f"✅ 이미지 {result.image_count} 장, 유리 정답 포인트 {result.glass_point_count} 개: {result.manifest_path}")
    return 0
