#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "almsp/error.hpp"
#include "almsp/parser.hpp"

namespace almsp {

using nlohmann::json;

namespace {

void write_all(int fd, const std::string& s) {
  std::size_t off = 0;
  while (off < s.size()) {
    const ssize_t n = ::write(fd, s.data() + off, s.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw AdapterError(std::string("parser process write failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

} // namespace

ExternalParser::ExternalParser(std::vector<std::string> argv) {
  if (argv.empty()) throw AdapterError("external parser: empty command");
  std::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2], out_pipe[2];
  if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) throw AdapterError("external parser: pipe() failed");
  pid_ = ::fork();
  if (pid_ < 0) throw AdapterError("external parser: fork() failed");
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    std::vector<char*> args;
    for (auto& a : argv) args.push_back(a.data());
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    std::_Exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);

  char tmpl[] = "/tmp/almsp-parser-XXXXXX";
  if (!::mkdtemp(tmpl)) throw AdapterError("external parser: cannot create scratch directory");
  scratch_dir_ = tmpl;
}

ExternalParser::~ExternalParser() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
  std::error_code ec;
  if (!scratch_dir_.empty()) std::filesystem::remove_all(scratch_dir_, ec);
}

std::string ExternalParser::scratch_file() {
  return scratch_dir_ + "/corpus-" + std::to_string(scratch_counter_++) + ".jsonl";
}

std::string ExternalParser::request(const std::string& line) {
  write_all(to_child_, line + "\n");
  while (true) {
    const auto nl = read_buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string resp = read_buffer_.substr(0, nl);
      read_buffer_.erase(0, nl + 1);
      return resp;
    }
    char buf[4096];
    const ssize_t n = ::read(from_child_, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw AdapterError("parser process closed its output");
    read_buffer_.append(buf, static_cast<std::size_t>(n));
  }
}

namespace {

json unwrap(const std::string& raw) {
  json resp;
  try {
    resp = json::parse(raw);
  } catch (const json::parse_error&) {
    throw AdapterError("parser process sent a malformed response: " + raw);
  }
  if (!resp.value("ok", false)) throw AdapterError("parser process error: " + resp.value("error", std::string("?")));
  return resp.at("result");
}

} // namespace

void ExternalParser::train(std::span<const LabeledUtterance> data) {
  std::lock_guard lock(mu_);
  const auto path = scratch_file();
  write_labeled_corpus(data, path);
  unwrap(request(json{{"cmd", "train"}, {"corpus", path}}.dump()));
}

std::string ExternalParser::predict(std::string_view utterance) {
  std::lock_guard lock(mu_);
  return unwrap(request(json{{"cmd", "predict"}, {"utterance", utterance}}.dump())).get<std::string>();
}

double ExternalParser::score(std::string_view utterance, std::string_view lf) {
  std::lock_guard lock(mu_);
  const double s = unwrap(request(json{{"cmd", "score"}, {"utterance", utterance}, {"lf", lf}}.dump())).get<double>();
  if (s > 0.0) throw AdapterError("parser process returned a positive log-probability");
  return s;
}

double ExternalParser::evaluate(std::span<const LabeledUtterance> test) {
  std::lock_guard lock(mu_);
  const auto path = scratch_file();
  write_labeled_corpus(test, path);
  return unwrap(request(json{{"cmd", "evaluate"}, {"corpus", path}}.dump())).get<double>();
}

} // namespace almsp
