#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdetect/types.hpp"

namespace tdetect {

struct CorpusRecord {
  std::string id;
  std::string text;
  Label label = Label::human;
  std::string domain;
  std::string attack = "none";
  std::string generator = "unknown";
};

using LabeledCorpus = std::vector<CorpusRecord>;

/// JSONL, one record per line. id, text, label and domain are required;
/// attack defaults to "none" and generator to "unknown". Blank lines are
/// skipped. Throws IngestError with the 1-based line of the first violation.
LabeledCorpus parse_corpus(std::istream& in);
LabeledCorpus load_corpus(const std::filesystem::path& path);

nlohmann::json to_json(const CorpusRecord& record);
void write_corpus(std::ostream& out, const LabeledCorpus& corpus);

}  // namespace tdetect
