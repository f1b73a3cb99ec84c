#pragma once

#include <string_view>

// Data files compiled into the library (see data/).
namespace tdetect::resources {

std::string_view function_words();
std::string_view confusables();
std::string_view thesaurus();
std::string_view spelling();
std::string_view fixture_train();
std::string_view fixture_human();

}  // namespace tdetect::resources
