#pragma once

// JSON-over-HTTP service: document CRUD with retention, asynchronous analysis
// jobs over immutable index snapshots, result caching, evidence lookup.

#include "docmodel.hpp"
#include "error.hpp"
#include "index.hpp"
#include "pipeline.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace nontextpd {

struct ServiceConfig {
    std::filesystem::path index_dir; // persisted after every change when set
    std::string api_token;           // bearer token; empty disables the check
    unsigned workers = 2;
    AnalysisConfig analysis;
};

struct Reply {
    int status = 200;
    json body;
};

inline Reply error_reply(int status, const Error& e) {
    return {status, {{"error", std::string(e.name())}, {"message", e.what()}}};
}

inline Reply error_reply(int status, std::string name, std::string message) {
    return {status, {{"error", std::move(name)}, {"message", std::move(message)}}};
}

class Service {
public:
    using Clock = std::chrono::steady_clock;

    explicit Service(IndexStore store, ServiceConfig cfg = {})
        : cfg_(std::move(cfg)), snapshot_(std::make_shared<const IndexStore>(std::move(store))) {
        for (unsigned i = 0; i < std::max(1u, cfg_.workers); ++i) workers_.emplace_back([this] { work(); });
    }

    ~Service() {
        {
            std::lock_guard lock(queue_mutex_);
            stopping_ = true;
        }
        queue_cv_.notify_all();
        for (auto& t : workers_) t.join();
    }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    std::shared_ptr<const IndexStore> snapshot() const {
        std::lock_guard lock(state_mutex_);
        return snapshot_;
    }

    // -- documents -----------------------------------------------------------

    Reply list_documents(const std::string& query = {}) {
        purge_expired();
        const auto store = snapshot();
        const auto needle = utf8::to_lower(query);
        json docs = json::array();
        for (const auto& id : store->doc_ids()) {
            const auto& d = store->document(id);
            std::string hay = utf8::to_lower(d.doc_id + "\n" + d.title + "\n" + (d.year ? std::to_string(*d.year) : ""));
            for (const auto& a : d.authors) hay += "\n" + utf8::to_lower(a);
            if (!needle.empty() && hay.find(needle) == std::string::npos) continue;
            docs.push_back({{"doc_id", d.doc_id},
                            {"title", d.title},
                            {"authors", d.authors},
                            {"year", d.year ? json(*d.year) : json(nullptr)}});
        }
        return {200, {{"documents", docs}, {"count", docs.size()}}};
    }

    /// Body: a document record, or {"document": record, "ttl_seconds": n}.
    Reply add_document(const std::string& body) {
        purge_expired();
        DocumentRecord doc;
        std::optional<double> ttl;
        try {
            auto j = json::parse(body);
            if (j.is_object() && j.contains("document") && j.at("document").is_object()) {
                if (j.contains("ttl_seconds")) ttl = j.at("ttl_seconds").get<double>();
                j = j.at("document");
            }
            doc = document_from_json(j);
        } catch (const json::exception& e) {
            return error_reply(422, "SchemaError", e.what());
        } catch (const Error& e) {
            return error_reply(422, e);
        }
        const std::string id = doc.doc_id;
        try {
            mutate([&](IndexStore& s) { s.add(std::move(doc)); });
        } catch (const Error& e) {
            return error_reply(e.code() == ErrorCode::duplicate_doc_id ? 409 : 422, e);
        }
        if (ttl) {
            std::lock_guard lock(state_mutex_);
            doc_expiry_[id] = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*ttl));
        }
        return {201, {{"doc_id", id}}};
    }

    /// The normalized record exactly as serialize_document writes it.
    std::optional<std::string> get_document(const std::string& id) {
        purge_expired();
        const auto store = snapshot();
        if (!store->contains(id)) return std::nullopt;
        return serialize_document(store->document(id));
    }

    Reply delete_document(const std::string& id) {
        purge_expired();
        bool removed = false;
        mutate([&](IndexStore& s) { removed = s.remove(id); });
        if (!removed) return error_reply(404, "UnknownDocId", "no document '" + id + "'");
        std::lock_guard lock(state_mutex_);
        doc_expiry_.erase(id);
        return {204, nullptr};
    }

    // -- analyses ------------------------------------------------------------

    /// Body: {"doc_id" | "document", "methods": [...], "scope": "full_collection"
    /// | {"doc_ids": [...]}, "retain_seconds": n}. Without a query, an explicit
    /// scope compares every listed document with every other (collusion check).
    Reply submit_analysis(const std::string& body) {
        purge_expired();
        json req;
        try {
            req = json::parse(body);
        } catch (const json::exception& e) {
            return error_reply(422, "SchemaError", e.what());
        }
        if (!req.is_object()) return error_reply(422, "SchemaError", "request must be an object");
        std::vector<std::string> methods;
        try {
            if (!req.contains("methods") || !req.at("methods").is_array() || req.at("methods").empty())
                throw Error(ErrorCode::schema_error, "'methods' must be a nonempty array");
            methods = normalize_methods(req.at("methods").get<std::vector<std::string>>());
        } catch (const Error& e) {
            auto r = error_reply(422, e);
            if (e.code() == ErrorCode::unknown_method) r.body["methods"] = method_names();
            return r;
        } catch (const json::exception& e) {
            return error_reply(422, "SchemaError", e.what());
        }
        auto job = std::make_shared<Job>();
        job->snapshot = snapshot();
        job->methods = methods;
        try {
            if (req.contains("document")) {
                job->query = document_from_json(req.at("document"));
            } else if (req.contains("doc_id")) {
                const auto id = req.at("doc_id").get<std::string>();
                if (!job->snapshot->contains(id)) return error_reply(404, "UnknownDocId", "no document '" + id + "'");
                job->query = job->snapshot->document(id);
            }
            const json scope = req.value("scope", json("full_collection"));
            if (scope.is_object()) {
                for (const auto& id : scope.at("doc_ids").get<std::vector<std::string>>()) {
                    if (!job->snapshot->contains(id)) return error_reply(404, "UnknownDocId", "no document '" + id + "'");
                    job->scope_ids.push_back(id);
                }
                job->explicit_scope = true;
            } else if (scope != "full_collection") {
                throw Error(ErrorCode::schema_error, "scope must be \"full_collection\" or {\"doc_ids\": [...]}");
            }
            if (!job->query && !job->explicit_scope)
                throw Error(ErrorCode::schema_error, "a query document is required for full_collection scope");
            if (req.contains("retain_seconds")) job->retain = req.at("retain_seconds").get<double>();
        } catch (const Error& e) {
            return error_reply(422, e);
        } catch (const json::exception& e) {
            return error_reply(422, "SchemaError", e.what());
        }

        json key_req = req;
        key_req.erase("retain_seconds");
        std::unique_lock lock(state_mutex_);
        const std::string key = std::to_string(generation_) + "|" + key_req.dump();
        if (const auto it = cache_.find(key); it != cache_.end()) {
            if (const auto jt = jobs_.find(it->second); jt != jobs_.end() && jt->second->status != "failed") {
                return {202, {{"job_id", jt->second->id}, {"status", jt->second->status}, {"cache_hit", true}}};
            }
        }
        job->id = "job-" + std::to_string(++job_counter_);
        jobs_[job->id] = job;
        cache_[key] = job->id;
        lock.unlock();
        {
            std::lock_guard qlock(queue_mutex_);
            queue_.push_back(job);
        }
        queue_cv_.notify_one();
        return {202, {{"job_id", job->id}, {"status", "queued"}, {"cache_hit", false}}};
    }

    Reply get_analysis(const std::string& id) {
        purge_expired();
        const auto job = find_job(id);
        if (!job) return error_reply(404, "UnknownJob", "no analysis '" + id + "'");
        std::lock_guard lock(job->mutex);
        json j{{"job_id", job->id}, {"status", job->status}, {"methods", job->methods}};
        j["scope"] = job->explicit_scope ? json{{"doc_ids", job->scope_ids}} : json("full_collection");
        if (job->status == "done") j["result"] = job->result;
        if (job->status == "failed") j["error"] = job->error;
        return {200, j};
    }

    /// Full evidence of one candidate for side-by-side rendering.
    Reply get_comparison(const std::string& id, const std::string& doc_id) {
        purge_expired();
        const auto job = find_job(id);
        if (!job) return error_reply(404, "UnknownJob", "no analysis '" + id + "'");
        std::lock_guard lock(job->mutex);
        if (job->status != "done")
            return {409, {{"error", "NotReady"}, {"message", "analysis is " + job->status}, {"status", job->status}}};
        const json* results = &job->result;
        json single = json::array();
        if (job->result.contains("results")) {
            results = &job->result.at("results");
        } else {
            single.push_back(job->result);
            results = &single;
        }
        for (const auto& r : *results)
            for (const auto& c : r.at("candidates"))
                if (c.at("doc_id") == doc_id)
                    return {200, {{"job_id", job->id}, {"query_doc", r.at("query_doc")}, {"comparison", c}}};
        return error_reply(404, "UnknownDocId", "document '" + doc_id + "' is not part of this analysis");
    }

    /// Blocks until the job leaves the queue or the timeout expires.
    bool wait(const std::string& id, std::chrono::milliseconds timeout = std::chrono::seconds(60)) {
        const auto job = find_job(id);
        if (!job) return false;
        std::unique_lock lock(job->mutex);
        return job->cv.wait_for(lock, timeout, [&] { return job->status == "done" || job->status == "failed"; });
    }

    // -- HTTP ----------------------------------------------------------------

    void bind(httplib::Server& server) {
        auto send = [](httplib::Response& res, const Reply& r) {
            res.status = r.status;
            if (r.status != 204) res.set_content(r.body.dump(), "application/json");
        };
        auto guarded = [this, send](auto handler) {
            return [this, send, handler](const httplib::Request& req, httplib::Response& res) {
                if (!cfg_.api_token.empty() && req.get_header_value("Authorization") != "Bearer " + cfg_.api_token) {
                    send(res, error_reply(401, "Unauthorized", "missing or invalid bearer token"));
                    return;
                }
                try {
                    handler(req, res);
                } catch (const Error& e) {
                    send(res, error_reply(500, e));
                } catch (const std::exception& e) {
                    send(res, error_reply(500, "InternalError", e.what()));
                }
            };
        };
        server.Get("/documents", guarded([this, send](const httplib::Request& req, httplib::Response& res) {
                       send(res, list_documents(req.has_param("q") ? req.get_param_value("q") : ""));
                   }));
        server.Post("/documents", guarded([this, send](const httplib::Request& req, httplib::Response& res) {
                        send(res, add_document(req.body));
                    }));
        server.Get(R"(/documents/([^/]+))", guarded([this, send](const httplib::Request& req, httplib::Response& res) {
                       if (auto doc = get_document(req.matches[1])) {
                           res.status = 200;
                           res.set_content(*doc, "application/json");
                       } else {
                           send(res, error_reply(404, "UnknownDocId", "no document '" + std::string(req.matches[1]) + "'"));
                       }
                   }));
        server.Delete(R"(/documents/([^/]+))", guarded([this, send](const httplib::Request& req, httplib::Response& res) {
                          send(res, delete_document(req.matches[1]));
                      }));
        server.Post("/analyses", guarded([this, send](const httplib::Request& req, httplib::Response& res) {
                        send(res, submit_analysis(req.body));
                    }));
        server.Get(R"(/analyses/([^/]+))", guarded([this, send](const httplib::Request& req, httplib::Response& res) {
                       send(res, get_analysis(req.matches[1]));
                   }));
        server.Get(R"(/analyses/([^/]+)/comparisons/([^/]+))",
                   guarded([this, send](const httplib::Request& req, httplib::Response& res) {
                       send(res, get_comparison(req.matches[1], req.matches[2]));
                   }));
        server.Get("/methods", guarded([send](const httplib::Request&, httplib::Response& res) {
                       send(res, {200, {{"methods", method_names()}}});
                   }));
    }

private:
    struct Job {
        std::string id;
        std::shared_ptr<const IndexStore> snapshot;
        std::optional<DocumentRecord> query;
        std::vector<std::string> methods;
        bool explicit_scope = false;
        std::vector<std::string> scope_ids;
        std::optional<double> retain;
        std::optional<Clock::time_point> expires;
        std::mutex mutex;
        std::condition_variable cv;
        std::string status = "queued";
        json result;
        json error;
    };

    template <class F>
    void mutate(F&& change) {
        std::lock_guard writer(writer_mutex_);
        auto next = std::make_shared<IndexStore>(*snapshot());
        change(*next);
        if (!cfg_.index_dir.empty()) next->save(cfg_.index_dir);
        std::lock_guard lock(state_mutex_);
        snapshot_ = std::move(next);
        ++generation_;
        cache_.clear();
    }

    std::shared_ptr<Job> find_job(const std::string& id) {
        std::lock_guard lock(state_mutex_);
        const auto it = jobs_.find(id);
        return it == jobs_.end() ? nullptr : it->second;
    }

    void purge_expired() {
        const auto now = Clock::now();
        std::vector<std::string> expired_docs;
        {
            std::lock_guard lock(state_mutex_);
            for (const auto& [id, t] : doc_expiry_)
                if (t <= now) expired_docs.push_back(id);
            for (auto it = jobs_.begin(); it != jobs_.end();) {
                bool drop = false;
                {
                    std::lock_guard jl(it->second->mutex);
                    drop = it->second->expires && *it->second->expires <= now;
                }
                it = drop ? jobs_.erase(it) : std::next(it);
            }
        }
        if (expired_docs.empty()) return;
        mutate([&](IndexStore& s) {
            for (const auto& id : expired_docs) s.remove(id);
        });
        std::lock_guard lock(state_mutex_);
        for (const auto& id : expired_docs) doc_expiry_.erase(id);
    }

    void run(Job& job) {
        const auto& store = *job.snapshot;
        if (job.query) {
            AnalysisResult r;
            if (job.explicit_scope) {
                std::vector<const DocumentRecord*> docs;
                for (const auto& id : job.scope_ids) docs.push_back(&store.document(id));
                r = analyze_explicit(*job.query, docs, job.methods, cfg_.analysis);
            } else {
                r = analyze_collection(store, *job.query, job.methods, cfg_.analysis);
            }
            job.result = to_json(r);
            return;
        }
        json results = json::array();
        for (const auto& qid : job.scope_ids) {
            std::vector<const DocumentRecord*> others;
            for (const auto& id : job.scope_ids)
                if (id != qid) others.push_back(&store.document(id));
            results.push_back(to_json(analyze_explicit(store.document(qid), others, job.methods, cfg_.analysis)));
        }
        job.result = {{"format_version", "1"}, {"scope", "explicit"}, {"results", std::move(results)}};
    }

    void work() {
        for (;;) {
            std::shared_ptr<Job> job;
            {
                std::unique_lock lock(queue_mutex_);
                queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
                if (stopping_ && queue_.empty()) return;
                job = queue_.front();
                queue_.pop_front();
            }
            {
                std::lock_guard lock(job->mutex);
                job->status = "running";
            }
            std::string status = "done";
            json error;
            try {
                run(*job);
            } catch (const Error& e) {
                status = "failed";
                error = {{"error", std::string(e.name())}, {"message", e.what()}};
            } catch (const std::exception& e) {
                status = "failed";
                error = {{"error", "InternalError"}, {"message", e.what()}};
            }
            {
                std::lock_guard lock(job->mutex);
                job->status = status;
                job->error = std::move(error);
                if (job->retain)
                    job->expires = Clock::now() +
                                   std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*job->retain));
            }
            job->cv.notify_all();
        }
    }

    ServiceConfig cfg_;
    mutable std::mutex state_mutex_;
    std::mutex writer_mutex_;
    std::shared_ptr<const IndexStore> snapshot_;
    std::map<std::string, Clock::time_point> doc_expiry_;
    std::map<std::string, std::shared_ptr<Job>> jobs_;
    std::map<std::string, std::string> cache_;
    std::uint64_t generation_ = 0;
    std::uint64_t job_counter_ = 0;

    std::mutex queue_mutex_;
    std::condition_variable queue_cv_;
    std::deque<std::shared_ptr<Job>> queue_;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

} // namespace nontextpd
