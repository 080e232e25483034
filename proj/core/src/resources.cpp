#include "concierge/resources.hpp"

#include <cstdlib>

namespace concierge {

Resources Resources::load(const std::filesystem::path& dir) {
  return Resources{
      load_catalog(dir / "kyoto_spots.json"),
      load_genre_list(dir / "genres.json"),
      load_keyword_lexicon(dir / "keyword_lexicon.json"),
      load_emphasis_profile(dir / "emphasis_profile.json"),
      load_phrase_list(dir / "person_names.json"),
      load_phrase_list(dir / "greetings.json"),
      load_motion_config(dir / "motion_config.json"),
  };
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("CONCIERGE_DATA_DIR"); env && *env) return env;
  return CONCIERGE_DEFAULT_DATA_DIR;
}

}  // namespace concierge
