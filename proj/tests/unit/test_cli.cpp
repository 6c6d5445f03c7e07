#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int exit_code;
  std::string output;
};

CommandResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  const fs::path out = fs::temp_directory_path() / "dwmpc_cli_out.txt";
  const std::string cmd = (env_prefix.empty() ? "" : env_prefix + " ") + std::string(DWMPC_CLI_PATH) +
                          " " + args + " > " + out.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(out);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return {WEXITSTATUS(raw), text};
}

fs::path write_config(const char* name, const std::string& body) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path;
}

const char* kHoverConfig = R"({
  "formation": {"kind": "i_stack", "z1": 0.2, "z2": 0.4},
  "trajectory": {"kind": "hover", "hover_duration": 6.0},
  "vehicles": [{"controller": "mpc"}],
  "plant": {"interaction": {"noise_sigma": 0.0}},
  "seeds": [1],
  "duration": 6.0
})";

}  // namespace

TEST_CASE("hover simulation exits cleanly with tight tracking") {
  const fs::path config = write_config("dwmpc_cli_hover.json", kHoverConfig);
  const fs::path out_dir = fs::temp_directory_path() / "dwmpc_cli_hover_runs";
  fs::remove_all(out_dir);
  const CommandResult r = run_cli("simulate " + config.string() + " --out " + out_dir.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("completed") != std::string::npos);
  CHECK(fs::exists(out_dir / "dwmpc_cli_hover_seed1.log"));

  // rmse printed on the run line must be tiny for an undisturbed hover.
  const auto pos = r.output.find("rmse=");
  REQUIRE(pos != std::string::npos);
  const double rmse = std::stod(r.output.substr(pos + 5));
  CHECK(rmse < 0.005);
}

TEST_CASE("config errors exit with code 1 and a diagnostic") {
  SUBCASE("unknown key") {
    const fs::path config = write_config("dwmpc_cli_badkey.json", R"({
      "formation": {"kind": "i_stack"}, "trajectory": {"kind": "hover"},
      "vehicles": [{"controller": "mpc"}], "bogus": 1})");
    const CommandResult r = run_cli("simulate " + config.string());
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("bogus") != std::string::npos);
  }
  SUBCASE("syntax error carries line/column") {
    const fs::path config = write_config("dwmpc_cli_syntax.json", "{\n  \"formation\": {,}\n}");
    const CommandResult r = run_cli("simulate " + config.string());
    CHECK(r.exit_code == 1);
    CHECK(r.output.find(":2:") != std::string::npos);
  }
  SUBCASE("knode vehicle without weights names the vehicle") {
    const fs::path config = write_config("dwmpc_cli_noweights.json", R"({
      "formation": {"kind": "i_stack"}, "trajectory": {"kind": "hover"},
      "vehicles": [{"controller": "mpc"}, {"controller": "l1_knode_dw_mpc"}]})");
    const CommandResult r = run_cli("simulate " + config.string());
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("vehicle 1") != std::string::npos);
  }
}

TEST_CASE("sweep requires existing weights") {
  const CommandResult r = run_cli("sweep --experiment center --weights /no/such/file --out /tmp/x");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("weights") != std::string::npos);
}

TEST_CASE("report on an empty directory fails with 'no runs found'") {
  const fs::path dir = fs::temp_directory_path() / "dwmpc_cli_empty";
  fs::create_directories(dir);
  const CommandResult r = run_cli("report --in " + dir.string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("no runs found") != std::string::npos);
}

TEST_CASE("report rebuilds tables from simulate output") {
  const fs::path config = write_config("dwmpc_cli_hover2.json", kHoverConfig);
  const fs::path out_dir = fs::temp_directory_path() / "dwmpc_cli_report_runs";
  fs::remove_all(out_dir);
  REQUIRE(run_cli("simulate " + config.string() + " --out " + out_dir.string()).exit_code == 0);

  const CommandResult r = run_cli("report --in " + out_dir.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out_dir / "report" / "metrics.csv"));
  CHECK(fs::exists(out_dir / "report" / "aggregate.csv"));
  bool found_hist = false;
  for (const auto& entry : fs::directory_iterator(out_dir / "report"))
    if (entry.path().filename().string().rfind("timehist_", 0) == 0) found_hist = true;
  CHECK(found_hist);
}

TEST_CASE("diverged training exits with code 3 and still saves a checkpoint") {
  const fs::path weights = fs::temp_directory_path() / "dwmpc_cli_diverged.txt";
  fs::remove(weights);
  const CommandResult r = run_cli("train --scenario static_top --epochs 60 --lr 1e9 --stride 40 --out " +
                                  weights.string());
  CHECK(r.exit_code == 3);
  CHECK(fs::exists(weights));
}

TEST_CASE("the output directory honors the environment override") {
  const fs::path config = write_config("dwmpc_cli_hover3.json", kHoverConfig);
  const fs::path env_dir = fs::temp_directory_path() / "dwmpc_cli_env_runs";
  fs::remove_all(env_dir);
  const CommandResult r =
      run_cli("simulate " + config.string(), "DWMPC_OUT_DIR=" + env_dir.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(env_dir / "dwmpc_cli_hover3_seed1.log"));
}

TEST_CASE("a crashing run exits with code 2 and reports the failure") {
  // Tight all-nominal stack near the floor: the bottom vehicle is driven into
  // the ground within the first second.
  const fs::path config = write_config("dwmpc_cli_crash.json", R"({
    "formation": {"kind": "i_stack", "z1": 0.2, "z2": 0.2},
    "trajectory": {"kind": "line", "start": [0.0, 0.0, 0.4]},
    "vehicles": [{"controller": "mpc"}, {"controller": "mpc"}, {"controller": "mpc"}],
    "seeds": [1]
  })");
  const fs::path out_dir = fs::temp_directory_path() / "dwmpc_cli_crash_runs";
  fs::remove_all(out_dir);
  const CommandResult r = run_cli("simulate " + config.string() + " --out " + out_dir.string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("crash") != std::string::npos);
}

TEST_CASE("training with zero epochs writes initialization and a single-row loss csv") {
  const fs::path weights = fs::temp_directory_path() / "dwmpc_cli_w0.txt";
  const fs::path loss_csv = fs::temp_directory_path() / "dwmpc_cli_loss0.csv";
  const CommandResult r = run_cli("train --scenario static_top --epochs 0 --stride 40 --out " +
                                  weights.string() + " --loss-csv " + loss_csv.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(weights));

  std::ifstream csv(loss_csv);
  std::string line;
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);  // header + single entry
}
