#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fiducia {

enum class Errc {
  malformed_record,
  duplicate_id,
  empty_vocabulary,
  malformed_lexicon,
  malformed_arcs,
  single_class_corpus,
  index_out_of_vocabulary,
  divergence_detected,
  unknown_user,
  unknown_column,
  unknown_item,
  feature_index_out_of_range,
  empty_graph,
  empty_corpus,
  undefined_metric,
  invalid_config,
  malformed_model,
  io_error,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::malformed_record: return "MalformedRecord";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::empty_vocabulary: return "EmptyVocabulary";
    case Errc::malformed_lexicon: return "MalformedLexicon";
    case Errc::malformed_arcs: return "MalformedArcs";
    case Errc::single_class_corpus: return "SingleClassCorpus";
    case Errc::index_out_of_vocabulary: return "IndexOutOfVocabulary";
    case Errc::divergence_detected: return "DivergenceDetected";
    case Errc::unknown_user: return "UnknownUser";
    case Errc::unknown_column: return "UnknownColumn";
    case Errc::unknown_item: return "UnknownItem";
    case Errc::feature_index_out_of_range: return "FeatureIndexOutOfRange";
    case Errc::empty_graph: return "EmptyGraph";
    case Errc::empty_corpus: return "EmptyCorpus";
    case Errc::undefined_metric: return "UndefinedMetric";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::malformed_model: return "MalformedModel";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the Errc kinds so the
/// CLI can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line, const std::string& reason)
      : Error(Errc::malformed_record, "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

}  // namespace fiducia
