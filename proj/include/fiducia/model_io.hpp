#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "fiducia/corpus.hpp"
#include "fiducia/error.hpp"
#include "fiducia/text_io.hpp"

namespace fiducia {

inline constexpr std::string_view kModelFormat = "fiducia-model";
inline constexpr int kModelVersion = 1;

/// Envelope shared by every serialized model. Doubles are written in their
/// shortest round-trip form, so loading reproduces parameters bit for bit.
inline json model_document(std::string_view kind, json hyperparameters, const Vocabulary* vocab,
                           json parameters) {
  json doc = {{"format", kModelFormat},
              {"version", kModelVersion},
              {"kind", kind},
              {"hyperparameters", std::move(hyperparameters)},
              {"parameters", std::move(parameters)}};
  if (vocab) {
    doc["vocabulary_hash"] = vocab->hash();
    doc["vocabulary"] = vocab->tokens();
    doc["vocabulary_min_count"] = vocab->min_count();
  }
  return doc;
}

/// Validates the envelope and returns the model kind.
inline std::string check_model_document(const json& doc) {
  if (!doc.is_object() || doc.value("format", "") != kModelFormat)
    throw Error(Errc::malformed_model, "not a fiducia model document");
  if (doc.value("version", 0) != kModelVersion)
    throw Error(Errc::malformed_model, "unsupported model version");
  if (!doc.contains("kind") || !doc["kind"].is_string())
    throw Error(Errc::malformed_model, "model kind missing");
  return doc["kind"].get<std::string>();
}

inline Vocabulary vocabulary_from_document(const json& doc) {
  if (!doc.contains("vocabulary")) throw Error(Errc::malformed_model, "vocabulary missing");
  Vocabulary vocab(doc["vocabulary"].get<std::vector<std::string>>(),
                   doc.value("vocabulary_min_count", std::size_t{1}));
  if (doc.value("vocabulary_hash", "") != vocab.hash())
    throw Error(Errc::malformed_model, "vocabulary hash mismatch");
  return vocab;
}

inline void save_document(const std::filesystem::path& path, const json& doc) {
  text::write_file_atomic(path, doc.dump(1) + "\n");
}

inline json load_document(const std::filesystem::path& path) {
  try {
    return json::parse(text::read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::malformed_model, path.string() + ": " + e.what());
  }
}

}  // namespace fiducia
