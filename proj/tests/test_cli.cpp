#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "aagan/data.hpp"

using namespace aagan;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int code = -1;
    std::string output;
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Runs the tool with stdout and stderr folded into one capture file.
CmdResult run_cli(const std::string& args) {
    static int counter = 0;
    const std::string capture =
        (fs::temp_directory_path() / ("aagan_cli_out_" + std::to_string(counter++))).string();
    const std::string cmd = std::string(AAGAN_CLI_PATH) + " " + args + " >" + capture + " 2>&1";
    const int raw = std::system(cmd.c_str());
    CmdResult result;
    result.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    result.output = slurp(capture);
    fs::remove(capture);
    return result;
}

// One scratch area per process run; tiny dataset shared by the workflow cases.
const fs::path& scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "aagan_cli_scratch";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string dataset_path() {
    static const std::string path = [] {
        const std::string p = (scratch() / "ds.bin").string();
        const CmdResult r = run_cli(
            "gen-data --classes 2 --dim 4 --samples 6 --len 10 --noise 0.03 --seed 3 --out " + p);
        REQUIRE(r.code == 0);
        return p;
    }();
    return path;
}

std::string train_flags() {
    return " --epochs 1 --batch 4 --hidden 4 --variant c --fraction 0.25 --resample 0 --seed 5";
}

std::string checkpoint_path() {
    static const std::string path = [] {
        const std::string dir = (scratch() / "base_run").string();
        const CmdResult r =
            run_cli("train --dataset " + dataset_path() + train_flags() + " --out-dir " + dir);
        REQUIRE(r.code == 0);
        return dir + "/checkpoint.bin";
    }();
    return path;
}

} // namespace

TEST_CASE("gen-data writes byte-identical files for equal flags") {
    const std::string a = (scratch() / "det_a.bin").string();
    const std::string b = (scratch() / "det_b.bin").string();
    const std::string flags = "gen-data --classes 4 --dim 32 --samples 2 --len 12 --seed 7 --out ";
    CHECK(run_cli(flags + a).code == 0);
    CHECK(run_cli(flags + b).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a + ".json") == slurp(b + ".json"));
}

TEST_CASE("gen-data summary counts classes times samples per class") {
    const CmdResult r = run_cli("gen-data --classes 3 --dim 4 --samples 5 --len 8 --seed 2 --out " +
                                (scratch() / "count.bin").string());
    CHECK(r.code == 0);
    CHECK(r.output.find("records=15") != std::string::npos);
    CHECK(r.output.find("classes=3") != std::string::npos);

    const DatasetManifest manifest = load_dataset((scratch() / "count.bin").string());
    CHECK(manifest.records.size() == 15);
    CHECK(manifest.num_classes == 3);
    CHECK(manifest.feature_dim == 4);
}

TEST_CASE("usage problems exit with code 2") {
    CHECK(run_cli("gen-data --classes 2").code == 2);          // no --out
    CHECK(run_cli("gen-data --classes 2 --bogus 1").code == 2); // unknown flag
    CHECK(run_cli("no-such-command").code == 2);
    CHECK(run_cli("").code == 2); // a subcommand is required
    CHECK(run_cli("train --variant zz --print-config").code == 0); // resolution only prints
    CHECK(run_cli("eval --dataset x").code == 2);              // no --checkpoint
    const CmdResult missing = run_cli("gen-data --classes 2 --dim 4");
    CHECK(missing.output.find("--out") != std::string::npos);
}

TEST_CASE("help exits cleanly") {
    const CmdResult top = run_cli("--help");
    CHECK(top.code == 0);
    CHECK(top.output.find("gen-data") != std::string::npos);
    CHECK(run_cli("train --help").code == 0);
}

TEST_CASE("default training flags match the published recipe") {
    const CmdResult r = run_cli("train --print-config");
    REQUIRE(r.code == 0);
    const nlohmann::json doc = nlohmann::json::parse(r.output);
    CHECK(doc.at("epochs").get<std::size_t>() == 40);
    CHECK(doc.at("batch_size").get<std::size_t>() == 32);
    CHECK(doc.at("learning_rate").get<double>() == 2e-4);
    CHECK(doc.at("decay").get<double>() == 8e-9);
    CHECK(doc.at("weights").at("visual").get<double>() == 25.0);
    CHECK(doc.at("weights").at("temporal").get<double>() == 20.0);
    CHECK(doc.at("weights").at("classification").get<double>() == 43.0);
    CHECK(doc.at("weights").at("regularization").get<double>() == 15.0);
    CHECK(doc.at("split").at("observed_fraction").get<double>() == 0.2);
    CHECK(doc.at("variant").get<std::string>() == "full");
}

TEST_CASE("explicit flags override the config file") {
    const std::string cfg = (scratch() / "layered.json").string();
    {
        std::ofstream f(cfg);
        f << R"({"epochs": 9, "dataset": "from_file.bin", "out_dir": "file_dir"})";
    }

    const CmdResult file_only = run_cli("train --config " + cfg + " --print-config");
    REQUIRE(file_only.code == 0);
    nlohmann::json doc = nlohmann::json::parse(file_only.output);
    CHECK(doc.at("epochs").get<std::size_t>() == 9);
    CHECK(doc.at("dataset").get<std::string>() == "from_file.bin");
    CHECK(doc.at("out_dir").get<std::string>() == "file_dir");

    const CmdResult layered =
        run_cli("train --config " + cfg + " --epochs 7 --weights 1,2,3,4 --print-config");
    REQUIRE(layered.code == 0);
    doc = nlohmann::json::parse(layered.output);
    CHECK(doc.at("epochs").get<std::size_t>() == 7);
    CHECK(doc.at("weights").at("visual").get<double>() == 1.0);
    CHECK(doc.at("weights").at("regularization").get<double>() == 4.0);

    const std::string bad = (scratch() / "bad.json").string();
    {
        std::ofstream f(bad);
        f << R"({"epoch": 9})";
    }
    CHECK(run_cli("train --config " + bad + " --print-config").code == 2);
    CHECK(run_cli("train --weights 1,2,3 --print-config").code == 2);
}

TEST_CASE("training writes a checkpoint and a metrics table") {
    const std::string ckpt = checkpoint_path();
    CHECK(fs::exists(ckpt));

    const std::string metrics = (fs::path(ckpt).parent_path() / "metrics.csv").string();
    REQUIRE(fs::exists(metrics));
    const std::string table = slurp(metrics);
    CHECK(table.rfind("step,visual_adversarial,temporal_adversarial,classification,"
                      "regularization,visual_generator,temporal_generator,total\n",
                      0) == 0);
}

TEST_CASE("two identical training runs produce identical bytes") {
    const std::string dir_a = (scratch() / "twin_a").string();
    const std::string dir_b = (scratch() / "twin_b").string();
    REQUIRE(run_cli("train --dataset " + dataset_path() + train_flags() + " --out-dir " + dir_a)
                .code == 0);
    REQUIRE(run_cli("train --dataset " + dataset_path() + train_flags() + " --out-dir " + dir_b)
                .code == 0);
    CHECK(slurp(dir_a + "/checkpoint.bin") == slurp(dir_b + "/checkpoint.bin"));
    CHECK(slurp(dir_a + "/metrics.csv") == slurp(dir_b + "/metrics.csv"));
}

TEST_CASE("eval scores a checkpoint and repeats exactly") {
    const std::string dir = (scratch() / "eval_out").string();
    const std::string args = "eval --dataset " + dataset_path() + " --checkpoint " +
                             checkpoint_path() + " --out-dir " + dir;
    const CmdResult first = run_cli(args);
    REQUIRE(first.code == 0);
    CHECK(first.output.find("setting=fraction=0.25") != std::string::npos);
    CHECK(first.output.find("accuracy=") != std::string::npos);
    CHECK(fs::exists(dir + "/report.csv"));
    CHECK(fs::exists(dir + "/report.json"));

    const CmdResult second = run_cli(args);
    CHECK(second.code == 0);
    CHECK(second.output == first.output);

    const CmdResult earliest = run_cli(args + " --setting earliest --resample 50");
    REQUIRE(earliest.code == 0);
    CHECK(earliest.output.find("setting=Earliest") != std::string::npos);

    CHECK(run_cli(args + " --setting earliest --fraction 0.3").code == 2); // mutually exclusive
}

TEST_CASE("ablate emits one median row per variant") {
    const std::string dir = (scratch() / "ablate_out").string();
    const CmdResult r = run_cli("ablate --dataset " + dataset_path() +
                                " --epochs 1 --batch 4 --hidden 4 --fraction 0.25 --resample 0"
                                " --variants a,c --seeds 2 --out-dir " +
                                dir);
    REQUIRE(r.code == 0);
    CHECK(r.output.find("variant=a ") != std::string::npos);
    CHECK(r.output.find("variant=c ") != std::string::npos);

    std::stringstream table(slurp(dir + "/ablation.csv"));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(table, line)) lines.push_back(line);
    REQUIRE(lines.size() == 3);
    CHECK(lines[1].rfind("a,", 0) == 0);
    CHECK(lines[2].rfind("c,", 0) == 0);

    const nlohmann::json doc = nlohmann::json::parse(slurp(dir + "/ablation.json"));
    REQUIRE(doc.is_array());
    CHECK(doc.size() == 2);
}

TEST_CASE("export-embeddings writes one row per sampled record") {
    const std::string dir = (scratch() / "export_out").string();
    const CmdResult r = run_cli("export-embeddings --dataset " + dataset_path() +
                                " --checkpoint " + checkpoint_path() + " --samples 4 --out-dir " +
                                dir);
    REQUIRE(r.code == 0);
    CHECK(r.output.find("rows=4") != std::string::npos);

    std::stringstream table(slurp(dir + "/embeddings.csv"));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(table, line)) lines.push_back(line);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "id,label,x_before,y_before,x_after,y_after");
}

TEST_CASE("runtime failures exit with code 1") {
    CHECK(run_cli("train --dataset /nonexistent_zz/ds.bin --epochs 1").code == 1);
    CHECK(run_cli("eval --dataset " + dataset_path() + " --checkpoint /nonexistent_zz/c.bin")
              .code == 1);

    const std::string junk = (scratch() / "junk.bin").string();
    {
        std::ofstream f(junk);
        f << "not a checkpoint";
    }
    CHECK(run_cli("eval --dataset " + dataset_path() + " --checkpoint " + junk).code == 1);
}

TEST_CASE("mismatched dataset and checkpoint dimensions exit with code 2") {
    const std::string other = (scratch() / "other.bin").string();
    REQUIRE(run_cli("gen-data --classes 3 --dim 5 --samples 4 --len 10 --seed 4 --out " + other)
                .code == 0);
    const CmdResult r =
        run_cli("eval --dataset " + other + " --checkpoint " + checkpoint_path());
    CHECK(r.code == 2);
    CHECK(r.output.find("do not match") != std::string::npos);

    CHECK(run_cli("train --dataset " + dataset_path() + train_flags() +
                  " --variant zz --out-dir " + (scratch() / "zz").string())
              .code == 2);
}
