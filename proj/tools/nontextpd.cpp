// nontextpd: index, analyze, compare, evaluate, serve.

#include <nontextpd/docmodel.hpp>
#include <nontextpd/evalmetrics.hpp>
#include <nontextpd/index.hpp>
#include <nontextpd/pipeline.hpp>
#include <nontextpd/service.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace nontextpd;

namespace {

int fail(std::string_view name, const std::string& message, int code = 1) {
    std::cerr << json{{"error", std::string(name)}, {"message", message}}.dump() << "\n";
    return code;
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const json& j, const std::string& out) {
    const auto text = j.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::io_error, "cannot write " + out);
    f << text;
}

struct DocFlags {
    bool derive_positions = false;
    bool codepoint_offsets = false;
    bool merge_references = false;

    void add_to(CLI::App* cmd) {
        cmd->add_flag("--derive-positions", derive_positions, "fill missing citation word/sentence/paragraph indices");
        cmd->add_flag("--codepoint-offsets", codepoint_offsets, "input offsets count codepoints instead of bytes");
        cmd->add_flag("--merge-references", merge_references, "unify near-identical references (edit distance <= 2)");
    }

    LoadOptions options() const {
        LoadOptions o;
        o.derive_positions = derive_positions;
        o.offsets = codepoint_offsets ? OffsetUnit::codepoint : OffsetUnit::byte;
        o.merge_similar_references = merge_references;
        return o;
    }
};

std::string default_index() {
    const char* env = std::getenv("NONTEXT_PD_INDEX");
    return env ? env : "";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid citation, math, image and text similarity analysis"};
    app.require_subcommand(1);

    DocFlags doc_flags;
    std::string methods_csv = "all";
    std::string out;
    AnalysisConfig cfg;

    // index
    auto* index_cmd = app.add_subcommand("index", "build an index from a directory of document JSON files");
    std::string docs_dir, index_out;
    unsigned retention_bits = cfg.fingerprint.retention_zero_bits;
    std::size_t ngram = cfg.fingerprint.ngram_len;
    index_cmd->add_option("dir", docs_dir, "directory of *.json documents")->required();
    index_cmd->add_option("--out", index_out, "index directory")->required();
    index_cmd->add_option("--retention-bits", retention_bits, "fingerprint zero bits (4 keeps 1/16, 3 keeps 1/8)");
    index_cmd->add_option("--ngram", ngram, "fingerprint word n-gram length");
    doc_flags.add_to(index_cmd);

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "retrieve candidates and compare a document against them");
    std::string doc_path, index_dir = default_index(), against;
    bool flagged_only = false;
    analyze_cmd->add_option("doc", doc_path, "query document JSON")->required();
    analyze_cmd->add_option("--index", index_dir, "index directory (default: $NONTEXT_PD_INDEX)");
    analyze_cmd->add_option("--methods", methods_csv, "comma-separated methods, or all");
    analyze_cmd->add_option("--against", against, "comma-separated doc ids: compare only with these");
    analyze_cmd->add_option("--out", out, "write the result here instead of stdout");
    analyze_cmd->add_option("--k", cfg.k, "candidates per retrieval method");
    analyze_cmd->add_flag("--flagged-only", flagged_only, "drop candidates without a significant score");
    doc_flags.add_to(analyze_cmd);

    // compare
    auto* compare_cmd = app.add_subcommand("compare", "compare two documents");
    std::string a_path, b_path;
    compare_cmd->add_option("a", a_path, "first (suspicious) document")->required();
    compare_cmd->add_option("b", b_path, "second document")->required();
    compare_cmd->add_option("--methods", methods_csv, "comma-separated methods, or all");
    compare_cmd->add_option("--out", out, "write the result here instead of stdout");
    doc_flags.add_to(compare_cmd);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "score detections against ground-truth cases");
    std::string truth, detections, format = "json";
    EvalThresholds taus;
    eval_cmd->add_option("--truth", truth, "cases JSON")->required();
    eval_cmd->add_option("--detections", detections, "detections JSON")->required();
    eval_cmd->add_option("--tau1", taus.tau1, "case/document recall threshold");
    eval_cmd->add_option("--tau2", taus.tau2, "case/document precision threshold");
    eval_cmd->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
    eval_cmd->add_option("--out", out, "write the report here instead of stdout");

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "run the HTTP API");
    std::string host = "127.0.0.1", token;
    int port = 8080;
    unsigned workers = 2;
    serve_cmd->add_option("--index", index_dir, "index directory (default: $NONTEXT_PD_INDEX)");
    serve_cmd->add_option("--host", host, "listen address");
    serve_cmd->add_option("--port", port, "listen port (0 picks a free port)");
    serve_cmd->add_option("--token", token, "require this bearer token");
    serve_cmd->add_option("--workers", workers, "analysis worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("UsageError", e.what(), 2);
    }

    try {
        if (*index_cmd) {
            cfg.fingerprint.retention_zero_bits = retention_bits;
            cfg.fingerprint.ngram_len = ngram;
            if (!fs::is_directory(docs_dir)) throw Error(ErrorCode::io_error, "not a directory: " + docs_dir);
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(docs_dir))
                if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            IndexStore store(cfg.fingerprint);
            for (const auto& f : files) {
                try {
                    store.add(load_document_file(f, doc_flags.options()));
                } catch (const Error& e) {
                    throw Error(e.code(), f.filename().string() + ": " + e.what());
                }
            }
            store.save(index_out);
            emit({{"documents", store.size()}, {"index", index_out}}, out);
            return 0;
        }
        if (*analyze_cmd) {
            if (index_dir.empty()) throw Error(ErrorCode::io_error, "no index given (--index or NONTEXT_PD_INDEX)");
            const auto store = IndexStore::load(index_dir);
            const auto query = load_document_file(doc_path, doc_flags.options());
            const auto methods = parse_method_list(methods_csv);
            AnalysisResult r;
            if (!against.empty()) {
                std::vector<const DocumentRecord*> docs;
                std::stringstream ss(against);
                for (std::string id; std::getline(ss, id, ',');)
                    if (!id.empty()) docs.push_back(&store.document(id));
                r = analyze_explicit(query, docs, methods, cfg);
            } else {
                r = analyze_collection(store, query, methods, cfg);
            }
            if (flagged_only) r = apply_thresholds(std::move(r), cfg.thresholds, true);
            emit(to_json(r), out);
            return 0;
        }
        if (*compare_cmd) {
            const auto a = load_document_file(a_path, doc_flags.options());
            const auto b = load_document_file(b_path, doc_flags.options());
            emit(to_json(analyze_explicit(a, {&b}, parse_method_list(methods_csv), cfg)), out);
            return 0;
        }
        if (*eval_cmd) {
            json jt, jd;
            try {
                jt = json::parse(read_all(truth));
                jd = json::parse(read_all(detections));
            } catch (const json::parse_error& e) {
                throw Error(ErrorCode::schema_error, e.what());
            }
            const auto cases = spans_from_json<PlagCase>(jt);
            const auto dets = spans_from_json<Detection>(jd);
            const auto report = to_json(plagdet_report(cases, dets), case_doc_level(cases, dets, taus), taus);
            if (format == "json") {
                emit(report, out);
            } else {
                std::ostringstream t;
                t << "metric            value\n";
                for (const char* k : {"precision", "recall", "granularity", "f1", "plagdet", "case_precision",
                                      "case_recall", "doc_precision", "doc_recall"}) {
                    char line[64];
                    std::snprintf(line, sizeof line, "%-17s %.6f\n", k, report.at(k).get<double>());
                    t << line;
                }
                if (out.empty()) std::cout << t.str();
                else std::ofstream(out) << t.str();
            }
            return 0;
        }
        if (*serve_cmd) {
            IndexStore store;
            if (!index_dir.empty() && fs::exists(fs::path(index_dir) / "manifest.json")) store = IndexStore::load(index_dir);
            ServiceConfig scfg;
            scfg.index_dir = index_dir;
            scfg.api_token = token;
            scfg.workers = workers;
            Service service(std::move(store), scfg);
            httplib::Server server;
            service.bind(server);
            const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
            if (bound < 0) throw Error(ErrorCode::io_error, "cannot listen on " + host + ":" + std::to_string(port));
            std::cout << json{{"listening", host + ":" + std::to_string(bound)}}.dump() << std::endl;
            server.listen_after_bind();
            return 0;
        }
    } catch (const Error& e) {
        return fail(e.name(), e.what());
    } catch (const std::exception& e) {
        return fail("InternalError", e.what());
    }
    return 0;
}
