// End-to-end exercises of the bclean binary. BCLEAN_CLI_PATH is injected by
// the build.

#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "bclean/manifest.hpp"
#include "bclean/table.hpp"
#include "doctest.h"
#include "json.hpp"

namespace {

struct TempDir {
    std::string path;
    TempDir() {
        char tmpl[] = "/tmp/bclean_cli_XXXXXX";
        path = ::mkdtemp(tmpl);
    }
    ~TempDir() {
        if (!path.empty() && std::system(("rm -rf " + path).c_str()) != 0) {
            std::perror("TempDir cleanup");
        }
    }
    std::string file(const std::string& name) const { return path + "/" + name; }
};

int run(const std::string& args) {
    const std::string cmd = std::string(BCLEAN_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("cli: usage errors exit with 1") {
    CHECK(run("definitely-not-a-subcommand") == 1);
    CHECK(run("profile") == 1);  // missing csv argument
}

TEST_CASE("cli: profile reports attribute stats and a manifest") {
    TempDir dir;
    write_file(dir.file("data.csv"), "a,b\n1,x\n2,\n3,y\n");
    const std::string out = dir.file("profile.json");
    REQUIRE(run("profile " + dir.file("data.csv") + " -o " + out) == 0);

    auto j = nlohmann::json::parse(bclean::read_file(out));
    REQUIRE(j["attributes"].size() == 2);
    CHECK(j["attributes"][0]["attribute"] == "a");
    CHECK(j["attributes"][0]["kind"] == "numeric");
    CHECK(j["attributes"][0]["distinct"] == 3);
    CHECK(j["attributes"][1]["null_count"] == 1);
    CHECK(j.contains("manifest"));
    CHECK(j["manifest"].contains("inputs"));
}

TEST_CASE("cli: profile of a missing or empty file fails") {
    TempDir dir;
    CHECK(run("profile " + dir.file("nope.csv")) == 3);
    write_file(dir.file("empty.csv"), "");
    CHECK(run("profile " + dir.file("empty.csv")) == 3);
}

TEST_CASE("cli: full pipeline synth -> inject -> learn -> clean -> eval") {
    TempDir dir;
    const std::string clean_csv = dir.file("clean.csv");
    const std::string dirty_csv = dir.file("dirty.csv");
    const std::string mask = dir.file("mask.json");
    const std::string model = dir.file("model.json");
    const std::string dot = dir.file("skeleton.dot");
    const std::string cleaned_csv = dir.file("cleaned.csv");
    const std::string report = dir.file("report.json");
    const std::string metrics = dir.file("metrics.json");

    REQUIRE(run("synth --rows 400 --groups 'A>B,C' --pool 8 --seed 5 --out " + clean_csv) == 0);
    REQUIRE(run("inject --csv " + clean_csv +
                " --rates typo=0.02,missing=0.02 --seed 6 --out " + dirty_csv + " --mask " +
                mask) == 0);
    REQUIRE(run("learn " + dirty_csv + " --model " + model + " --dot " + dot) == 0);
    REQUIRE(run("clean --csv " + dirty_csv + " --model " + model + " --out " + cleaned_csv +
                " --report " + report + " --threads 1") == 0);
    REQUIRE(run("eval --dirty " + dirty_csv + " --cleaned " + cleaned_csv + " --clean " +
                clean_csv + " --mask " + mask + " -o " + metrics) == 0);

    auto m = nlohmann::json::parse(bclean::read_file(metrics));
    CHECK(m["f1"].get<double>() > 0.5);  // dependency-rich table cleans well
    CHECK(m.contains("per_type_recall"));

    // skeleton recovered at least one FD edge
    const std::string dot_text = bclean::read_file(dot);
    CHECK(dot_text.find("->") != std::string::npos);

    auto r = nlohmann::json::parse(bclean::read_file(report));
    CHECK(r["repairs"].size() > 0);
    CHECK(r.contains("manifest"));
}

TEST_CASE("cli: learn is byte-identical across reruns") {
    TempDir dir;
    const std::string csv = dir.file("data.csv");
    REQUIRE(run("synth --rows 200 --groups 'A>B' --pool 6 --seed 11 --out " + csv) == 0);
    REQUIRE(run("learn " + csv + " --model " + dir.file("m1.json") + " --seed 1") == 0);
    REQUIRE(run("learn " + csv + " --model " + dir.file("m2.json") + " --seed 1") == 0);
    CHECK(bclean::read_file(dir.file("m1.json")) == bclean::read_file(dir.file("m2.json")));
}

TEST_CASE("cli: edit applies scripts, reports failing step, round-trips") {
    TempDir dir;
    const std::string csv = dir.file("data.csv");
    const std::string model = dir.file("model.json");
    REQUIRE(run("synth --rows 150 --groups 'A>B;C>D' --pool 5 --seed 13 --out " + csv) == 0);
    REQUIRE(run("learn " + csv + " --model " + model + " --edge-threshold 2.0") == 0);

    SUBCASE("add then remove restores the original model") {
        write_file(dir.file("add.json"),
                   R"([{"op": "add_edge", "parent": "A", "child": "B"}])");
        write_file(dir.file("remove.json"),
                   R"([{"op": "remove_edge", "parent": "A", "child": "B"}])");
        REQUIRE(run("edit --model " + model + " --edits " + dir.file("add.json") + " --csv " +
                    csv + " --out " + dir.file("m_add.json")) == 0);
        REQUIRE(run("edit --model " + dir.file("m_add.json") + " --edits " +
                    dir.file("remove.json") + " --csv " + csv + " --out " +
                    dir.file("m_back.json")) == 0);

        auto original = nlohmann::json::parse(bclean::read_file(model));
        auto with_edge = nlohmann::json::parse(bclean::read_file(dir.file("m_add.json")));
        auto back = nlohmann::json::parse(bclean::read_file(dir.file("m_back.json")));
        CHECK(with_edge["network"]["edges"].size() == original["network"]["edges"].size() + 1);
        CHECK(back["network"] == original["network"]);
    }

    SUBCASE("cycle-creating script fails at the right step") {
        write_file(dir.file("cycle.json"),
                   R"([{"op": "add_edge", "parent": "A", "child": "B"},
                       {"op": "add_edge", "parent": "B", "child": "A"}])");
        CHECK(run("edit --model " + model + " --edits " + dir.file("cycle.json") + " --csv " +
                  csv + " --out " + dir.file("m_cycle.json")) == 3);
    }

    SUBCASE("merge creates the composite node and cleaning still runs") {
        write_file(dir.file("merge.json"), R"([{"op": "merge", "nodes": ["A", "C"]}])");
        REQUIRE(run("edit --model " + model + " --edits " + dir.file("merge.json") + " --csv " +
                    csv + " --out " + dir.file("m_merge.json")) == 0);
        auto merged = nlohmann::json::parse(bclean::read_file(dir.file("m_merge.json")));
        bool found = false;
        for (const auto& n : merged["network"]["nodes"]) {
            if (n.get<std::string>() == "A+C") found = true;
        }
        CHECK(found);
        REQUIRE(run("clean --csv " + csv + " --model " + dir.file("m_merge.json") + " --out " +
                    dir.file("cleaned.csv") + " --report " + dir.file("rep.json") +
                    " --threads 1") == 0);
        // output keeps the raw schema: no composite column
        bclean::Table cleaned = bclean::load_csv(dir.file("cleaned.csv"));
        CHECK(cleaned.n_cols() == 4);
        CHECK(!cleaned.has_column("A+C"));
    }
}

TEST_CASE("cli: clean with NULL-heavy UC-violating column warns via exit 2") {
    TempDir dir;
    const std::string csv = dir.file("data.csv");
    write_file(csv, "A,B\nx,1\nx,2\nx,3\ny,4\n");
    const std::string model = dir.file("model.json");
    REQUIRE(run("learn " + csv + " --model " + model + " --kind B=text") == 0);
    // no B value has length >= 5: every candidate fails, cells are skipped
    write_file(dir.file("ucs.json"), R"({"B": {"min_len": 5}})");
    CHECK(run("clean --csv " + csv + " --model " + model + " --ucs " + dir.file("ucs.json") +
              " --out " + dir.file("out.csv") + " --threads 1") == 2);
}

TEST_CASE("cli: no-partition and default produce identical output on small models") {
    TempDir dir;
    const std::string csv = dir.file("data.csv");
    const std::string model = dir.file("model.json");
    REQUIRE(run("synth --rows 250 --groups 'A>B,C' --pool 6 --seed 21 --out " + csv) == 0);
    REQUIRE(run("inject --csv " + csv + " --rates typo=0.03 --seed 22 --out " +
                dir.file("dirty.csv")) == 0);
    REQUIRE(run("learn " + dir.file("dirty.csv") + " --model " + model) == 0);
    REQUIRE(run("clean --csv " + dir.file("dirty.csv") + " --model " + model + " --out " +
                dir.file("c1.csv") + " --threads 1") == 0);
    REQUIRE(run("clean --csv " + dir.file("dirty.csv") + " --model " + model +
                " --no-partition --out " + dir.file("c2.csv") + " --threads 1") == 0);
    CHECK(bclean::read_file(dir.file("c1.csv")) == bclean::read_file(dir.file("c2.csv")));
}

TEST_CASE("cli: inject with rate 0 produces an empty mask; seeds reproduce") {
    TempDir dir;
    const std::string csv = dir.file("data.csv");
    REQUIRE(run("synth --rows 100 --groups 'A>B' --pool 4 --seed 31 --out " + csv) == 0);
    REQUIRE(run("inject --csv " + csv + " --rates typo=0 --seed 1 --out " + dir.file("d0.csv") +
                " --mask " + dir.file("mask0.json")) == 0);
    auto mask0 = nlohmann::json::parse(bclean::read_file(dir.file("mask0.json")));
    CHECK(mask0.empty());
    CHECK(bclean::read_file(dir.file("d0.csv")) == bclean::read_file(csv));

    REQUIRE(run("inject --csv " + csv + " --rates typo=0.05 --seed 7 --out " +
                dir.file("d1.csv") + " --mask " + dir.file("m1.json")) == 0);
    REQUIRE(run("inject --csv " + csv + " --rates typo=0.05 --seed 7 --out " +
                dir.file("d2.csv") + " --mask " + dir.file("m2.json")) == 0);
    CHECK(bclean::read_file(dir.file("d1.csv")) == bclean::read_file(dir.file("d2.csv")));
    CHECK(bclean::read_file(dir.file("m1.json")) == bclean::read_file(dir.file("m2.json")));
}

TEST_CASE("cli: eval on a known fixture yields exact metrics") {
    TempDir dir;
    write_file(dir.file("clean.csv"), "a,b\nv1,w1\nv2,w2\nv3,w3\n");
    write_file(dir.file("dirty.csv"), "a,b\nX,w1\nv2,Y\nv3,w3\n");
    write_file(dir.file("cleaned.csv"), "a,b\nv1,w1\nv2,Z\nv3,w3\n");
    REQUIRE(run("eval --dirty " + dir.file("dirty.csv") + " --cleaned " +
                dir.file("cleaned.csv") + " --clean " + dir.file("clean.csv") + " -o " +
                dir.file("metrics.json")) == 0);
    auto m = nlohmann::json::parse(bclean::read_file(dir.file("metrics.json")));
    // modified = 2 (X->v1, Y->Z), correct = 1, errors = 2
    CHECK(m["modified"] == 2);
    CHECK(m["correct"] == 1);
    CHECK(m["errors"] == 2);
    CHECK(m["precision"].get<double>() == doctest::Approx(0.5));
    CHECK(m["recall"].get<double>() == doctest::Approx(0.5));
}
