#include "cli_run.hpp"

#include <nontextpd/docmodel.hpp>

#include <gtest/gtest.h>

using nontextpd::json;
namespace fs = std::filesystem;

namespace {

const fs::path samples = NONTEXTPD_SAMPLES;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("nontextpd_cli_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

double score(const json& candidate, const std::string& method) {
    for (const auto& s : candidate.at("scores"))
        if (s.at("method") == method) return s.at("score").get<double>();
    return -1;
}

} // namespace

TEST(Cli, CompareDocumentWithItself) {
    const auto doc = clirun::quote(samples / "docs" / "paper-01.json");
    const auto r = clirun::run("compare " + doc + " " + doc + " --methods lccs");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto j = json::parse(r.out);
    ASSERT_EQ(j.at("candidates").size(), 1U);
    EXPECT_DOUBLE_EQ(score(j.at("candidates")[0], "lccs"), 1.0);
}

TEST(Cli, EvaluatePerfectDetections) {
    const auto r = clirun::run("evaluate --truth " + clirun::quote(samples / "eval" / "truth.json") + " --detections " +
                               clirun::quote(samples / "eval" / "perfect.json"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_DOUBLE_EQ(j.at("plagdet").get<double>(), 1.0);
    EXPECT_DOUBLE_EQ(j.at("granularity").get<double>(), 1.0);

    const auto text = clirun::run("evaluate --format text --truth " + clirun::quote(samples / "eval" / "truth.json") +
                                  " --detections " + clirun::quote(samples / "eval" / "detections.json"));
    ASSERT_EQ(text.exit_code, 0) << text.err;
    EXPECT_NE(text.out.find("plagdet"), std::string::npos);
}

TEST(Cli, MalformedDocumentReportsJsonError) {
    TempDir tmp;
    std::ofstream(tmp.path / "bad.json") << R"({"doc_id": "bad", "text": 12})";
    const auto good = clirun::quote(samples / "docs" / "paper-01.json");
    const auto r = clirun::run("compare " + clirun::quote(tmp.path / "bad.json") + " " + good);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_TRUE(r.out.empty());
    const auto err = json::parse(r.err);
    EXPECT_EQ(err.at("error"), "SchemaError");
    EXPECT_TRUE(err.contains("message"));

    EXPECT_EQ(clirun::run("compare " + good).exit_code, 2);
    EXPECT_EQ(clirun::run("compare " + good + " " + good + " --methods nope").exit_code, 1);
}

TEST(Cli, IndexThenAnalyzeFindsDuplicate) {
    TempDir tmp;
    const auto docs = tmp.path / "docs";
    fs::copy(samples / "docs", docs, fs::copy_options::recursive);

    fs::path richest;
    std::size_t most = 0;
    for (const auto& e : fs::directory_iterator(docs)) {
        if (e.path().extension() != ".json") continue;
        const auto d = nontextpd::load_document_file(e.path());
        if (d.identifiers.size() > most) most = d.identifiers.size(), richest = e.path();
    }
    ASSERT_FALSE(richest.empty());
    auto dup = json::parse(clirun::slurp(richest));
    dup["doc_id"] = "zz-copy";
    std::ofstream(docs / "zz-copy.json") << dup.dump();

    const auto idx = tmp.path / "index";
    const auto built = clirun::run("index " + clirun::quote(docs) + " --out " + clirun::quote(idx));
    ASSERT_EQ(built.exit_code, 0) << built.err;
    EXPECT_EQ(json::parse(built.out).at("documents"), 13);

    const auto r = clirun::run("analyze " + clirun::quote(richest) + " --index " + clirun::quote(idx) +
                               " --methods all --flagged-only");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto j = json::parse(r.out);
    ASSERT_FALSE(j.at("candidates").empty());
    const auto& top = j.at("candidates")[0];
    EXPECT_EQ(top.at("doc_id"), "zz-copy");
    EXPECT_GT(top.at("flagged_count").get<int>(), 0);
    EXPECT_DOUBLE_EQ(score(top, "lccs"), 1.0);
}
