#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "concierge/generation.hpp"
#include "concierge/motion_director.hpp"
#include "concierge/speech_markup.hpp"
#include "concierge/spot_catalog.hpp"

namespace concierge {

/// Read-only data every session shares.
struct Resources {
  Catalog catalog;
  GenreList genres;
  KeywordLexicon lexicon;
  EmphasisProfile profile;
  std::vector<std::string> persons;
  std::vector<std::string> greetings;
  MotionConfig motion;

  /// Loads kyoto_spots.json, genres.json, keyword_lexicon.json,
  /// emphasis_profile.json, person_names.json, greetings.json and
  /// motion_config.json from dir.
  static Resources load(const std::filesystem::path& dir);
};

/// Directory holding the shipped data files.
std::filesystem::path default_data_dir();

}  // namespace concierge
