#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace almsp {

/// floor(x + 0.5); used for every percentage-to-count conversion.
inline std::int64_t round_half_up(double x) { return static_cast<std::int64_t>(std::floor(x + 0.5)); }

/// Counts utterance-text reads per language. Shared by every copy of an
/// audited example, so sub-corpora report into the same counter.
class AccessAudit {
public:
  void record(std::string_view lang);
  std::size_t reads(std::string_view lang) const;
  void reset();

private:
  mutable std::mutex mu_;
  std::map<std::string, std::size_t, std::less<>> reads_;
};

class Example {
public:
  std::string id;
  std::string lf;

  Example() = default;
  Example(std::string id, std::string lf) : id(std::move(id)), lf(std::move(lf)) {}

  bool has_utterance(std::string_view lang) const;
  /// Audited read; nullptr when absent.
  const std::string* find_utterance(std::string_view lang) const;
  /// Audited read; throws CorpusError when absent.
  const std::string& utterance(std::string_view lang) const;
  void set_utterance(std::string lang, std::string text);
  void erase_utterance(std::string_view lang);
  std::vector<std::string> languages() const;

  void attach_audit(std::shared_ptr<AccessAudit> audit) { audit_ = std::move(audit); }

private:
  std::map<std::string, std::string, std::less<>> utterances_;
  std::shared_ptr<AccessAudit> audit_;
};

struct Corpus {
  std::vector<Example> examples;
  std::string source_lang = "en";
  std::string target_lang = "de";

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  /// Linear scan; nullptr when missing.
  const Example* find(std::string_view id) const;
  void attach_audit(const std::shared_ptr<AccessAudit>& audit);
  /// Throws CorpusError on duplicate ids.
  std::unordered_map<std::string, std::size_t> index() const;
};

struct SplitSpec {
  double dev_fraction = 0.20;
  std::uint64_t seed = 0;
};

enum class CorpusFormat { Jsonl };

/// One JSON object per line with exactly `id`, `lf` and `utterances`.
/// Every LF is parsed; every record must carry the source language unless
/// source_lang is empty.
Corpus load_corpus(const std::string& path, CorpusFormat format = CorpusFormat::Jsonl,
                   std::string source_lang = "en", std::string target_lang = "de");
Corpus parse_corpus(std::string_view text, std::string source_lang = "en",
                    std::string target_lang = "de");
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::string& path);

/// |dev| = round_half_up(f * N), at least 1 when f > 0. Both halves keep
/// file order.
std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec);

std::vector<std::string> read_id_list(const std::string& path);
void write_id_list(const std::vector<std::string>& ids, const std::string& path);

} // namespace almsp
