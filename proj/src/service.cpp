#include "almsp/service.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <httplib.h>

#include "almsp/error.hpp"

namespace almsp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum class Activity { Starting, Training, Selecting, Awaiting };

ServiceError not_found(const std::string& id) { return {404, "not_found", "unknown session '" + id + "'"}; }

} // namespace

struct AnnotationService::Session {
  std::string id;
  CampaignConfig config;
  json body;
  Corpus train;
  Corpus test;
  std::unique_ptr<ParserAdapter> parser;
  std::unique_ptr<MachineTranslator> mt;
  std::unique_ptr<UtteranceEmbedder> embedder;
  std::shared_ptr<TranslationChannel> channel;
  std::unique_ptr<HumanSessionOracle> oracle;
  std::unique_ptr<Campaign> campaign;
  std::thread worker;
  std::string journal_path;
  std::atomic<bool> stopping{false};

  mutable std::mutex mu;
  mutable std::condition_variable cv;
  Activity activity = Activity::Starting;
  int round = 0;
  std::vector<MetricsRecord> metrics;
  std::size_t journaled_metrics = 0;
  std::vector<Example> translated;
  std::set<std::string> accepted;
  bool finished = false;
  std::string error;

  void journal_locked(const json& line) {
    if (journal_path.empty()) return;
    std::ofstream out(journal_path, std::ios::app);
    out << line.dump() << '\n';
    out.flush();
    if (!out) throw Error("cannot append to journal '" + journal_path + "'");
  }

  void capture_metrics_locked() {
    metrics = campaign->state().metrics;
    for (; journaled_metrics < metrics.size(); ++journaled_metrics) {
      journal_locked({{"type", "metrics"}, {"record", metrics[journaled_metrics].to_json()}});
    }
  }

  // Runs on the campaign thread, which is the only writer of the campaign.
  void on_phase(Phase p, int q) {
    std::lock_guard lock(mu);
    switch (p) {
      case Phase::Training:
        activity = Activity::Training;
        translated = campaign->state().translated;
        break;
      case Phase::Selecting:
        activity = Activity::Selecting;
        round = q;
        capture_metrics_locked();
        break;
      case Phase::AwaitingTranslations:
        activity = Activity::Awaiting;
        round = q;
        break;
      case Phase::Finished:
        capture_metrics_locked();
        finished = true;
        break;
    }
    cv.notify_all();
  }

  bool awaiting_locked() const {
    return activity == Activity::Awaiting && channel->has_batch() && !channel->pending().empty();
  }

  std::string status_locked() const {
    if (!error.empty()) return "failed";
    if (finished) return "finished";
    return awaiting_locked() ? "awaiting_translations" : "training";
  }

  std::size_t batch_size_locked() const {
    if (finished || round < 1) return 0;
    return campaign->state().budgets.at(static_cast<std::size_t>(round - 1));
  }
};

AnnotationService::AnnotationService(ServiceOptions options) : options_(std::move(options)) {
  if (!options_.parser_factory) options_.parser_factory = [](const CampaignConfig& c) { return make_parser(c); };
  if (!options_.journal_dir.empty()) {
    fs::create_directories(options_.journal_dir);
    replay_journals();
  }
}

AnnotationService::~AnnotationService() {
  stop();
  std::map<std::string, std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(mu_);
    all.swap(sessions_);
  }
  for (auto& [id, s] : all) {
    s->stopping = true;
    s->channel->cancel();
  }
  for (auto& [id, s] : all) {
    if (s->worker.joinable()) s->worker.join();
  }
}

std::shared_ptr<AnnotationService::Session> AnnotationService::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw not_found(id);
  return it->second;
}

std::vector<std::string> AnnotationService::sessions() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) out.push_back(id);
  return out;
}

std::shared_ptr<AnnotationService::Session> AnnotationService::launch(
    const std::string& id, const json& body, const std::vector<std::pair<std::string, std::string>>& replay) {
  if (!body.is_object()) throw ServiceError(400, "bad_request", "session body must be an object");
  json cfg = body;
  cfg.erase("examples");
  if (!cfg.contains("oracle")) cfg["oracle"] = "human";
  auto s = std::make_shared<Session>();
  s->id = id;
  s->body = body;
  try {
    s->config = config_from_json(cfg);
    if (s->config.oracle != OracleKind::HumanSession) {
      throw ConfigError("sessions need oracle = human");
    }
    Corpus corpus;
    if (body.contains("examples")) {
      const auto& ex = body.at("examples");
      if (!ex.is_array()) throw ConfigError("'examples' must be an array of corpus records");
      std::string text;
      for (const auto& r : ex) text += r.dump() + "\n";
      corpus = parse_corpus(text, s->config.source_lang, s->config.target_lang);
    } else if (!s->config.corpus_path.empty()) {
      corpus = load_corpus(s->config.corpus_path, CorpusFormat::Jsonl, s->config.source_lang, s->config.target_lang);
    } else {
      throw ConfigError("a session needs 'examples' or a 'corpus' path");
    }
    std::tie(s->train, s->test) = campaign_split(corpus, s->config);
    s->parser = options_.parser_factory(s->config);
    s->mt = make_machine_translator(s->config);
    s->embedder = make_embedder(s->config);
    s->channel = std::make_shared<TranslationChannel>();
    s->channel->attach();
    s->oracle = std::make_unique<HumanSessionOracle>(s->channel, options_.show_lf);
    s->campaign = std::make_unique<Campaign>(s->train, s->test, s->config, *s->parser, *s->oracle, s->mt.get(),
                                             s->embedder.get());
  } catch (const ServiceError&) {
    throw;
  } catch (const std::exception& e) {
    throw ServiceError(400, "invalid_config", e.what());
  }

  for (const auto& [tid, text] : replay) {
    s->channel->preload(tid, text);
    s->accepted.insert(tid);
  }
  if (!options_.journal_dir.empty()) s->journal_path = (fs::path(options_.journal_dir) / (id + ".jsonl")).string();

  Session* raw = s.get();
  s->campaign->set_phase_observer([raw](Phase p, int q) { raw->on_phase(p, q); });
  s->worker = std::thread([raw] {
    try {
      raw->campaign->run_all();
    } catch (const std::exception& e) {
      std::lock_guard lock(raw->mu);
      if (!raw->stopping) raw->error = e.what();
      raw->cv.notify_all();
    }
  });
  return s;
}

json AnnotationService::create_session(const json& body) {
  std::string id;
  {
    std::lock_guard lock(mu_);
    id = "s" + std::to_string(next_id_++);
  }
  auto s = launch(id, body, {});
  if (!s->journal_path.empty()) {
    std::lock_guard lock(s->mu);
    s->journal_locked({{"type", "session"}, {"id", id}, {"body", body}});
  }
  {
    std::lock_guard lock(mu_);
    sessions_.emplace(id, s);
  }
  wait_idle(id);
  std::lock_guard lock(s->mu);
  return {{"session", id}, {"status", s->status_locked()}, {"round", s->round}, {"batch_size", s->batch_size_locked()}};
}

void AnnotationService::wait_idle(const std::string& id) const {
  auto s = find(id);
  std::unique_lock lock(s->mu);
  while (!(s->finished || !s->error.empty() || s->awaiting_locked())) {
    s->cv.wait_for(lock, std::chrono::milliseconds(10));
  }
}

json AnnotationService::batch(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  json items = json::array();
  if (s->awaiting_locked()) {
    for (const auto& p : s->channel->pending()) {
      json item{{"id", p.id}, {"utterance", p.source}};
      if (!p.lf.empty()) item["lf"] = p.lf;
      items.push_back(std::move(item));
    }
  }
  const std::size_t size = s->batch_size_locked();
  return {{"session", id},
          {"status", s->status_locked()},
          {"round", s->round},
          {"batch_size", size},
          {"submitted", s->finished ? 0 : size - items.size()},
          {"items", std::move(items)}};
}

json AnnotationService::submit(const std::string& id, const json& body) {
  auto s = find(id);
  std::vector<std::pair<std::string, std::string>> entries;
  const json* tr = body.is_object() && body.contains("translations") ? &body.at("translations") : nullptr;
  if (!tr) throw ServiceError(400, "bad_request", "body needs a 'translations' field");
  auto text_of = [](const json& v) {
    if (!v.is_string()) throw ServiceError(400, "bad_request", "translations must be strings");
    return v.get<std::string>();
  };
  if (tr->is_object()) {
    for (const auto& [k, v] : tr->items()) entries.emplace_back(k, text_of(v));
  } else if (tr->is_array()) {
    for (const auto& r : *tr) {
      if (!r.is_object() || !r.contains("id") || !r.contains("utterance") || !r.at("id").is_string()) {
        throw ServiceError(400, "bad_request", "translation records need 'id' and 'utterance'");
      }
      entries.emplace_back(r.at("id").get<std::string>(), text_of(r.at("utterance")));
    }
  } else {
    throw ServiceError(400, "bad_request", "'translations' must be an object or an array");
  }
  if (entries.empty()) throw ServiceError(400, "bad_request", "no translations given");

  std::lock_guard lock(s->mu);
  std::set<std::string> pending, seen;
  if (s->awaiting_locked()) {
    for (const auto& p : s->channel->pending()) pending.insert(p.id);
  }
  for (const auto& [tid, text] : entries) {
    if (s->accepted.count(tid) || !seen.insert(tid).second) {
      throw ServiceError(409, "conflict", "'" + tid + "' already has a translation");
    }
    if (!pending.count(tid)) {
      if (pending.empty()) throw ServiceError(409, "no_batch", "no batch is waiting for translations");
      throw ServiceError(400, "unknown_id", "'" + tid + "' is not in the pending batch");
    }
    if (text.empty()) throw ServiceError(400, "empty_utterance", "empty translation for '" + tid + "'");
  }
  const int round = s->round;
  for (const auto& [tid, text] : entries) {
    s->journal_locked({{"type", "translation"}, {"round", round}, {"id", tid}, {"text", text}});
    const auto outcome = s->channel->submit(tid, text);
    if (outcome != SubmitOutcome::Accepted) throw Error("channel rejected a validated submission for '" + tid + "'");
    s->accepted.insert(tid);
  }
  if (pending.size() == entries.size()) s->activity = Activity::Training;
  s->cv.notify_all();
  return {{"accepted", entries.size()},
          {"remaining", pending.size() - entries.size()},
          {"status", s->status_locked()},
          {"round", round}};
}

json AnnotationService::status(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  json m = json::array();
  for (const auto& r : s->metrics) m.push_back(r.to_json());
  const auto pending = s->awaiting_locked() ? s->channel->pending().size() : 0;
  json out{{"session", id},
           {"status", s->status_locked()},
           {"round", s->round},
           {"completed_rounds", s->metrics.empty() ? 0 : s->metrics.size() - 1},
           {"rounds", s->config.rounds()},
           {"batch_size", s->batch_size_locked()},
           {"pending", pending},
           {"translated", s->accepted.size()},
           {"budgets", s->campaign->state().budgets},
           {"metrics", std::move(m)}};
  if (!s->error.empty()) out["error"] = s->error;
  return out;
}

json AnnotationService::metrics(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  json m = json::array();
  for (const auto& r : s->metrics) m.push_back(r.to_json());
  return {{"session", id}, {"records", std::move(m)}};
}

std::vector<Example> AnnotationService::training_pool(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return s->translated;
}

void AnnotationService::replay_journals() {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(options_.journal_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string line;
    std::optional<json> header;
    std::vector<std::pair<std::string, std::string>> translations;
    std::size_t metric_lines = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        break;  // torn final write
      }
      const auto type = j.value("type", "");
      if (type == "session") header = j;
      else if (type == "translation") translations.emplace_back(j.at("id").get<std::string>(), j.at("text").get<std::string>());
      else if (type == "metrics") ++metric_lines;
    }
    if (!header) continue;
    const std::string id = header->at("id").get<std::string>();
    auto s = launch(id, header->at("body"), translations);
    {
      std::lock_guard lock(s->mu);
      s->journaled_metrics = metric_lines;
    }
    std::lock_guard lock(mu_);
    sessions_.emplace(id, s);
    if (id.size() > 1 && id[0] == 's') {
      try {
        next_id_ = std::max<std::size_t>(next_id_, std::stoull(id.substr(1)) + 1);
      } catch (const std::exception&) {
      }
    }
  }
}

// ---- HTTP ------------------------------------------------------------------

void AnnotationService::install_routes() {
  auto& srv = *server_;
  auto send = [](httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  };
  auto guarded = [send](auto&& fn) {
    return [fn, send](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const ServiceError& e) {
        send(res, e.status, {{"error", {{"code", e.code}, {"message", e.what()}}}});
      } catch (const json::exception& e) {
        send(res, 400, {{"error", {{"code", "bad_json"}, {"message", e.what()}}}});
      } catch (const std::exception& e) {
        send(res, 500, {{"error", {{"code", "internal"}, {"message", e.what()}}}});
      }
    };
  };

  srv.Post("/sessions", guarded([this, send](const httplib::Request& req, httplib::Response& res) {
             send(res, 201, create_session(json::parse(req.body)));
           }));
  srv.Get(R"(/sessions/([^/]+)/batch)", guarded([this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, 200, batch(req.matches[1]));
          }));
  srv.Post(R"(/sessions/([^/]+)/translations)",
           guarded([this, send](const httplib::Request& req, httplib::Response& res) {
             send(res, 200, submit(req.matches[1], json::parse(req.body)));
           }));
  srv.Get(R"(/sessions/([^/]+)/status)", guarded([this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, 200, status(req.matches[1]));
          }));
  srv.Get(R"(/sessions/([^/]+)/metrics)", guarded([this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, 200, metrics(req.matches[1]));
          }));
  srv.set_pre_routing_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    return httplib::Server::HandlerResponse::Unhandled;
  });
  srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

bool AnnotationService::listen(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  install_routes();
  return server_->listen(host, port);
}

int AnnotationService::start_background(const std::string& host) {
  server_ = std::make_unique<httplib::Server>();
  install_routes();
  const int port = server_->bind_to_any_port(host);
  if (port < 0) throw Error("cannot bind the annotation service");
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void AnnotationService::stop() {
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
}

} // namespace almsp
