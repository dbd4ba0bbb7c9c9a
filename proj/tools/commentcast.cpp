// commentcast: turn a video's transcript, Danmu comments, keyframes, and audio
// into an audio-discussion timeline.
//
//   commentcast --config run.json [stage]
//
// Stages: segment, curate, plan, render, all (default).

#include "commentcast/pipeline.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

int exit_code_for(commentcast::ErrorCode code) {
  return code == commentcast::ErrorCode::ProviderFailure ? 2 : 1;
}

void report_error(std::string_view code, std::string_view message) {
  nlohmann::json err = {{"error", {{"code", code}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compile Danmu comments into an accessible audio-discussion timeline"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string providers_mode;
  std::string remote_url;
  std::string out_dir;
  std::string cache_dir;
  std::string stage_flag;
  std::string stage_positional;
  app.add_option("--config", config_path, "Pipeline config (JSON)")->required();
  app.add_option("--seed", seed, "Seed for tone assignment (default from config, else 0)");
  app.add_option("--providers", providers_mode, "Provider backend")->check(CLI::IsMember({"offline", "remote"}));
  app.add_option("--remote-url", remote_url, "Base URL of the remote provider service");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--cache", cache_dir, "Provider response cache directory");
  app.add_option("--stage", stage_flag, "segment | curate | plan | render | all");
  app.add_option("command", stage_positional, "Stage to run, same as --stage");
  CLI11_PARSE(app, argc, argv);

  using namespace commentcast;
  try {
    auto config = pipeline::load_config(config_path);
    if (seed) config.seed = *seed;
    if (!remote_url.empty()) config.providers.base_url = remote_url;
    if (providers_mode == "offline") config.providers.mode = ProviderMode::Offline;
    if (providers_mode == "remote") {
      config.providers.mode = ProviderMode::Remote;
      if (config.providers.base_url.empty()) throw Error(ErrorCode::InvalidConfig, "--providers remote needs --remote-url");
    }
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (!cache_dir.empty()) config.cache_dir = cache_dir;

    const std::string stage_name = !stage_flag.empty() ? stage_flag : (!stage_positional.empty() ? stage_positional : "all");
    const auto stage = pipeline::parse_stage(stage_name);
    if (!stage) throw Error(ErrorCode::InvalidConfig, "unknown stage '" + stage_name + "'");

    const auto report = pipeline::run(*stage, config);
    for (const auto& w : report.warnings.items()) std::cerr << "warning: " << w << "\n";
    for (const auto& path : report.written) std::cout << path.string() << "\n";
    return 0;
  } catch (const Error& e) {
    report_error(to_string(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    report_error("Internal", e.what());
    return 1;
  }
}
