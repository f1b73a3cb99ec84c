#include "tdetect/corpus.hpp"

#include <fstream>
#include <unordered_map>

#include "tdetect/backend.hpp"
#include "tdetect/error.hpp"
#include "tdetect/utf8.hpp"

namespace tdetect {

namespace {

std::string string_field(const nlohmann::json& doc, const char* name, std::size_t line,
                         const char* fallback = nullptr) {
  auto it = doc.find(name);
  if (it == doc.end()) {
    if (fallback != nullptr) return fallback;
    throw IngestError(name, line, "missing field");
  }
  if (!it->is_string()) throw IngestError(name, line, "not a string");
  return it->get<std::string>();
}

}  // namespace

LabeledCorpus parse_corpus(std::istream& in) {
  LabeledCorpus corpus;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    if (!utf8::is_valid(line)) throw IngestError("text", line_no, "invalid UTF-8");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw IngestError("json", line_no, e.what());
    }
    if (!doc.is_object()) throw IngestError("json", line_no, "record is not an object");

    CorpusRecord r;
    r.id = string_field(doc, "id", line_no);
    r.text = string_field(doc, "text", line_no);
    const std::string label = string_field(doc, "label", line_no);
    r.domain = string_field(doc, "domain", line_no);
    r.attack = string_field(doc, "attack", line_no, "none");
    r.generator = string_field(doc, "generator", line_no, "unknown");

    if (r.id.empty()) throw IngestError("id", line_no, "empty id");
    if (is_blank(r.text)) throw IngestError("text", line_no, "empty text");
    const auto parsed = parse_label(label);
    if (!parsed) throw IngestError("label", line_no, "expected human or machine, got \"" + label + "\"");
    r.label = *parsed;
    if (auto [it, fresh] = seen.emplace(r.id, line_no); !fresh) {
      throw IngestError("duplicate id", line_no,
                        "\"" + r.id + "\" first seen on line " + std::to_string(it->second));
    }
    corpus.push_back(std::move(r));
  }
  return corpus;
}

LabeledCorpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open corpus " + path.string());
  return parse_corpus(in);
}

nlohmann::json to_json(const CorpusRecord& r) {
  return {{"id", r.id},         {"text", r.text},         {"label", to_string(r.label)},
          {"domain", r.domain}, {"attack", r.attack},     {"generator", r.generator}};
}

void write_corpus(std::ostream& out, const LabeledCorpus& corpus) {
  for (const auto& r : corpus) out << to_json(r).dump() << '\n';
}

}  // namespace tdetect
