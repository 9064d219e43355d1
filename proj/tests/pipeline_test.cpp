#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "fixtures.hpp"
#include "tvqm/pipeline.hpp"

using namespace tvqm;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path root;
  Workspace() {
    static int counter = 0;
    root = fs::temp_directory_path() / ("tvqm_pipe_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }
  std::string file(const std::string& name) const { return (root / name).string(); }

  /// Write a small textured video + smooth depth and a config pointing at them.
  std::string make_experiment(const std::string& extra = "", int frames = 4, int size = 16) {
    std::vector<Frame> video;
    std::vector<DepthFrame> depth;
    for (int k = 0; k < frames; ++k) {
      video.push_back(fixtures::textured_frame(size, size, k));
      depth.push_back(fixtures::smooth_depth(size, size));
    }
    SequenceDescriptor vd{file("ref.yuv"), size, size, frames, PixelFormat::Luma};
    write_video(video, vd);
    write_depth(depth, file("ref.depth"));

    std::ofstream cfg(file("exp.cfg"));
    cfg << "sequence_id = fixture\n"
        << "ref_video = " << file("ref.yuv") << "\n"
        << "depth = " << file("ref.depth") << "\n"
        << "width = " << size << "\nheight = " << size << "\nframes = " << frames << "\n"
        << "cam.focal_length = 60\ncam.baseline = 0.05\ncam.alpha = 120\n"
        << "cam.z_near = 0.3\ncam.z_far = 10\n"
        << "out_dir = " << file("out") << "\n"
        << "seed = 7\n"
        << extra;
    return file("exp.cfg");
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("distortion spec strings parse into typed specs") {
  const auto blur = parse_distortion_spec("blur:7:2");
  CHECK(blur.kind == DistortionSpec::Kind::Blur);
  CHECK(blur.blur.kernel_size == 7);
  CHECK(blur.blur.sigma == doctest::Approx(2.0));

  const auto qp = parse_distortion_spec("qp:40");
  CHECK(qp.kind == DistortionSpec::Kind::Compress);
  CHECK(qp.compress.qp == 40);

  const auto loss = parse_distortion_spec("loss:0.05:burst5:seed42");
  CHECK(loss.kind == DistortionSpec::Kind::Loss);
  CHECK(loss.loss_rate == doctest::Approx(0.05));
  CHECK(loss.burst_length == doctest::Approx(5.0));
  CHECK(loss.seed == 42);

  CHECK(parse_distortion_spec("none").kind == DistortionSpec::Kind::None);
  CHECK_THROWS_AS(parse_distortion_spec("blur:8:2"), ConfigError);
  CHECK_THROWS_AS(parse_distortion_spec("loss:1.5"), ConfigError);
  CHECK_THROWS_AS(parse_distortion_spec("warp:1"), ConfigError);
  CHECK_THROWS_AS(parse_distortion_spec("qp:40:extra"), ConfigError);
}

TEST_CASE("config parsing applies defaults and rejects bad keys") {
  Workspace ws;
  const auto path = ws.make_experiment("distortions = blur:7:2, qp:40\nmetrics = 3vqm, psnr\n");
  const ExperimentConfig cfg = parse_config(path);
  CHECK(cfg.sequence_id == "fixture");
  CHECK(cfg.cam.alpha == doctest::Approx(120.0));
  CHECK(cfg.distortions.size() == 2);
  CHECK(cfg.metrics == std::vector<std::string>{"3vqm", "psnr"});
  CHECK(cfg.channel == DegradedChannel::Depth);
  CHECK(cfg.seed == 7);

  std::ofstream bad(ws.file("bad.cfg"));
  bad << "ref_video = x\n";
  bad.close();
  CHECK_THROWS_AS(parse_config(ws.file("bad.cfg")), ConfigError);
  CHECK_THROWS_AS(parse_config(ws.file("nonexistent.cfg")), ConfigError);
}

TEST_CASE("degrade writes outputs and a manifest") {
  Workspace ws;
  const auto path = ws.make_experiment("distortions = blur:7:2\nchannel = depth\n");
  const auto manifest = cmd_degrade(parse_config(path));
  const auto rows = read_csv(manifest.string());
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][1] == "depth");
  CHECK(rows[1][2] == "blur");
  CHECK(rows[1][3] == "blur:7:2");
  CHECK(fs::exists(rows[1][0]));
  // degraded depth must differ from the original
  CHECK(slurp(rows[1][0]) != slurp(ws.file("ref.depth")));
}

TEST_CASE("degrade with an empty distortion list writes a bare manifest") {
  Workspace ws;
  const auto manifest = cmd_degrade(parse_config(ws.make_experiment()));
  CHECK(read_csv(manifest.string()).size() == 1);
}

TEST_CASE("degrade with a loss spec is reproducible byte for byte") {
  Workspace ws;
  const auto path = ws.make_experiment("distortions = loss:0.3:burst2:seed42\nchannel = color\n");
  const auto m1 = cmd_degrade(parse_config(path));
  const auto rows = read_csv(m1.string());
  REQUIRE(rows.size() == 2);
  const std::string first = slurp(rows[1][0]);
  cmd_degrade(parse_config(path));
  CHECK(slurp(rows[1][0]) == first);
}

TEST_CASE("render writes a synthesized sequence of the input geometry") {
  Workspace ws;
  const auto path = ws.make_experiment();
  const auto out = cmd_render(parse_config(path));
  CHECK(fs::file_size(out) == 16u * 16u * 4u);
}

TEST_CASE("score emits one row per (spec, metric) with clean identity rows") {
  Workspace ws;
  const auto path = ws.make_experiment("distortions = none\nmetrics = 3vqm, psnr\n");
  const auto out = cmd_score(parse_config(path));
  const auto rows = read_csv(out.string());
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"sequence", "channel", "distortion", "level",
                                            "metric", "value"});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    CHECK(rows[r][0] == "fixture");
    if (rows[r][4] == "3vqm") CHECK(std::stod(rows[r][5]) == doctest::Approx(5.0).epsilon(1e-9));
    if (rows[r][4] == "psnr") CHECK(std::stod(rows[r][5]) == doctest::Approx(100.0));
  }
}

TEST_CASE("score grid is byte-identical across runs") {
  Workspace ws;
  const auto path = ws.make_experiment(
      "distortions = blur:7:2, qp:40, loss:0.2:burst2\nmetrics = 3vqm, psnr\nchannel = color\n");
  const auto out = cmd_score(parse_config(path));
  const std::string first = slurp(out.string());
  cmd_score(parse_config(path));
  CHECK(slurp(out.string()) == first);
  CHECK(read_csv(out.string()).size() == 7);  // header + 3 specs x 2 metrics
}

TEST_CASE("validate joins scores and DMOS and rejects id mismatches") {
  Workspace ws;
  {
    CsvTable scores;
    scores.header = {"sequence", "channel", "distortion", "level", "metric", "value"};
    const std::vector<double> dmos{1.0, 2.0, 3.0, 4.0};
    for (std::size_t i = 0; i < dmos.size(); ++i)
      scores.add_row({"s" + std::to_string(i), std::string("depth"), std::string("none"),
                      std::string("none"), std::string("psnr"), dmos[i]});
    write_csv(scores, ws.file("scores.csv"));

    std::ofstream d(ws.file("dmos.csv"));
    d << "sequence_id,dmos\n";
    for (std::size_t i = 0; i < dmos.size(); ++i)
      d << "s" << i << "," << dmos[i] << "\n";
  }
  const CsvTable rep = cmd_validate(ws.file("dmos.csv"), ws.file("scores.csv"));
  REQUIRE(rep.rows.size() == 1);
  CHECK(std::get<double>(rep.rows[0][1]) == doctest::Approx(0.0));  // RMSE
  CHECK(std::get<double>(rep.rows[0][2]) == doctest::Approx(1.0));  // CC

  std::ofstream d(ws.file("dmos2.csv"));
  d << "sequence_id,dmos\ns0,1\ns1,2\nsX,3\n";
  d.close();
  CHECK_THROWS_AS(cmd_validate(ws.file("dmos2.csv"), ws.file("scores.csv")), DataError);
}

TEST_CASE("validate raises a degeneracy error on constant scores") {
  Workspace ws;
  CsvTable scores;
  scores.header = {"sequence", "channel", "distortion", "level", "metric", "value"};
  for (int i = 0; i < 4; ++i)
    scores.add_row({"s" + std::to_string(i), std::string("depth"), std::string("none"),
                    std::string("none"), std::string("psnr"), 7.0});
  write_csv(scores, ws.file("scores.csv"));
  std::ofstream d(ws.file("dmos.csv"));
  d << "sequence_id,dmos\ns0,1\ns1,2\ns2,3\ns3,4\n";
  d.close();
  CHECK_THROWS_AS(cmd_validate(ws.file("dmos.csv"), ws.file("scores.csv")), DegeneracyError);
}

TEST_CASE("report aggregates scores per distortion level") {
  Workspace ws;
  CsvTable scores;
  scores.header = {"sequence", "channel", "distortion", "level", "metric", "value"};
  scores.add_row({std::string("a"), std::string("depth"), std::string("blur"),
                  std::string("blur:7:2"), std::string("psnr"), 30.0});
  scores.add_row({std::string("b"), std::string("depth"), std::string("blur"),
                  std::string("blur:7:2"), std::string("psnr"), 40.0});
  write_csv(scores, ws.file("scores.csv"));
  const CsvTable rep = cmd_report(ws.file("scores.csv"));
  REQUIRE(rep.rows.size() == 1);
  CHECK(std::get<double>(rep.rows[0][4]) == doctest::Approx(35.0));
  CHECK(std::get<double>(rep.rows[0][5]) == doctest::Approx(2.0));
}

#ifdef TVQM_CLI_PATH
TEST_CASE("cli exit codes: 0 success, 2 config, 3 data") {
  Workspace ws;
  const auto cfg = ws.make_experiment("distortions = none\nmetrics = 3vqm\n");
  auto run = [](const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
  };
  const std::string cli = TVQM_CLI_PATH;
  CHECK(run(cli + " score -c " + cfg + " > /dev/null 2>&1") == 0);
  CHECK(run(cli + " score -c " + ws.file("missing.cfg") + " > /dev/null 2>&1") == 2);

  // truncate the depth file -> data error
  std::ofstream trunc(ws.file("ref.depth"), std::ios::binary | std::ios::trunc);
  trunc << "xx";
  trunc.close();
  CHECK(run(cli + " score -c " + cfg + " > /dev/null 2>&1") == 3);
}
#endif
