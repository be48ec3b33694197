#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "genb/commands.hpp"
#include "genb/fixture.hpp"
#include "genb/wire.hpp"

namespace {

using namespace genb;
namespace fs = std::filesystem;

void add_backend_flags(CLI::App* cmd, cli::BackendChoice& choice) {
  cmd->add_flag("--mock", choice.mock, "Use the built-in deterministic mock backend");
  cmd->add_option("--backend", choice.url, "Worker base URL (default: $GENB_BACKEND_URL)");
}

int report_error(const std::exception& e) {
  nlohmann::json err = {{"event", "error"}, {"message", e.what()}};
  if (const auto* ge = dynamic_cast<const Error*>(&e)) err["code"] = to_string(ge->code());
  std::cerr << err.dump() << '\n';
  return cli::kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"genb: per-part diffusion inpainting for synthetic human datasets"};
  app.require_subcommand(1);

  // validate
  std::string validate_root;
  auto* validate = app.add_subcommand("validate", "Check a dataset tree against its invariants");
  validate->add_option("root", validate_root, "Dataset root")->required();

  // generate
  cli::GenerateOptions gen;
  cli::BackendChoice gen_backend;
  std::optional<std::string> config_path, preset;
  std::optional<std::uint64_t> seed;
  std::string gen_in, gen_out;
  gen.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto* generate = app.add_subcommand("generate", "Run per-part inpainting over a dataset");
  generate->add_option("root", gen_in, "Input dataset root")->required();
  generate->add_option("out", gen_out, "Output root")->required();
  generate->add_option("--config", config_path, "Generation config (JSON)");
  generate->add_option("--preset", preset, "Ablation preset (see `genb presets`)");
  generate->add_option("--seed", seed, "Override the global seed");
  generate->add_option("--workers", gen.workers, "Frame worker threads")->check(CLI::PositiveNumber);
  generate->add_flag("--resume", gen.resume, "Skip frames whose outputs are complete");
  generate->add_flag("--dump-conditions", gen.dump_conditions,
                     "Write control images to <frame>/cond/<person>/<part>/");
  generate->add_option("--frames", gen.frames_glob, "Frame id glob");
  add_backend_flags(generate, gen_backend);

  // fid
  cli::FidOptions fid;
  cli::BackendChoice fid_backend;
  std::string fid_image = "auto";
  std::optional<std::string> fid_cache, fid_out;
  std::string fid_a, fid_b;
  auto* fid_cmd = app.add_subcommand("fid", "Frechet distance between person crops of two sets");
  fid_cmd->add_option("set_a", fid_a, "Frame tree or directory with boxes.json")->required();
  fid_cmd->add_option("set_b", fid_b, "Frame tree or directory with boxes.json")->required();
  fid_cmd->add_option("--crop-size", fid.crops.crop_size, "Crop side in pixels")
      ->check(CLI::PositiveNumber);
  fid_cmd->add_option("--image", fid_image, "Frame image for tree sets")
      ->check(CLI::IsMember({"auto", "gen", "orig"}));
  fid_cmd->add_option("--cache-dir", fid_cache, "Feature cache directory");
  fid_cmd->add_option("--out", fid_out, "Also write the JSON result here");
  add_backend_flags(fid_cmd, fid_backend);

  // contact-sheet
  std::string sheet_before, sheet_after, sheet_out, sheet_glob;
  int sheet_width = 320;
  auto* sheet = app.add_subcommand("contact-sheet", "Side-by-side original/generated grid");
  sheet->add_option("before", sheet_before, "Original dataset root")->required();
  sheet->add_option("after", sheet_after, "Generated output root")->required();
  sheet->add_option("out", sheet_out, "Output PNG")->required();
  sheet->add_option("--frames", sheet_glob, "Frame id glob");
  sheet->add_option("--cell-width", sheet_width, "Width of each cell")->check(CLI::PositiveNumber);

  // make-fixture
  std::string fixture_out;
  int fixture_frames = 5;
  auto* make_fixture = app.add_subcommand("make-fixture", "Write a procedural test dataset");
  make_fixture->add_option("out", fixture_out, "Output root")->required();
  make_fixture->add_option("--frames", fixture_frames, "Number of frames")->check(CLI::PositiveNumber);

  // serve-mock
  std::string host = "127.0.0.1";
  int port = 8088;
  auto* serve = app.add_subcommand("serve-mock", "Serve the mock backend over wire protocol v1");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");

  auto* presets = app.add_subcommand("presets", "List ablation presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  try {
    if (*validate) return cli::run_validate(validate_root, std::cout);

    if (*generate) {
      gen.input = gen_in;
      gen.output = gen_out;
      gen.config = cli::load_config(config_path ? std::optional<fs::path>(*config_path) : std::nullopt,
                                    preset);
      if (seed) gen.config.global_seed = *seed;
      auto backend = cli::make_backend(gen_backend);
      cli::EventLog log(std::cerr);
      const cli::RunManifest m = cli::run_generate(gen, *backend, log);
      int done = 0, failed = 0, skipped = 0;
      for (const auto& f : m.frames) {
        done += f.status == "done";
        failed += f.status == "failed";
        skipped += f.status == "skipped";
      }
      std::cout << nlohmann::json{{"frames", m.frames.size()}, {"done", done}, {"failed", failed},
                                  {"skipped", skipped}, {"seconds", m.seconds}}
                       .dump()
                << '\n';
      return m.any_failed() ? cli::kExitFailure : cli::kExitOk;
    }

    if (*fid_cmd) {
      fid.set_a = fid_a;
      fid.set_b = fid_b;
      fid.crops.image = fid_image == "gen"    ? CropImage::generated
                        : fid_image == "orig" ? CropImage::original
                                              : CropImage::automatic;
      if (fid_cache) fid.cache_dir = fs::path(*fid_cache);
      if (fid_out) fid.out = fs::path(*fid_out);
      auto backend = cli::make_backend(fid_backend);
      const FidResult r = cli::run_fid(fid, *backend, std::cout);
      if (r.ridge_applied) {
        std::cerr << nlohmann::json{{"event", "warning"},
                                    {"message", "covariance eigenvalues clamped; ridge 1e-6*I applied"}}
                         .dump()
                  << '\n';
      }
      return cli::kExitOk;
    }

    if (*sheet) {
      const ImageU8 img = cli::contact_sheet(sheet_before, sheet_after, sheet_glob, sheet_width);
      detail::write_png_atomic(sheet_out, img);
      return cli::kExitOk;
    }

    if (*make_fixture) {
      fixture::write_dataset(fixture_out, fixture::standard_scenes(fixture_frames));
      return cli::kExitOk;
    }

    if (*serve) {
      MockBackend mock;
      httplib::Server server;
      wire::mount(server, mock);
      std::cerr << nlohmann::json{{"event", "listening"}, {"host", host}, {"port", port}}.dump() << '\n';
      return server.listen(host, port) ? cli::kExitOk : cli::kExitFailure;
    }

    if (*presets) {
      std::cout << "none\n";
      for (const auto& p : ablation_presets()) std::cout << p << '\n';
      return cli::kExitOk;
    }
  } catch (const Error& e) {
    const bool usage = e.code() == Errc::InvalidConfig || e.code() == Errc::InvalidStrength ||
                       e.code() == Errc::UnsupportedControl || e.code() == Errc::UnknownPart;
    report_error(e);
    return usage ? cli::kExitUsage : cli::kExitFailure;
  } catch (const std::exception& e) {
    return report_error(e);
  }
  return cli::kExitUsage;
}
