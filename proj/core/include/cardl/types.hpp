#pragma once

#include <string>
#include <string_view>

namespace cardl {

enum class Modality { kText, kImage };

// Retrieval direction: source modality of the query, target of the results.
enum class Direction { kTextToImage, kImageToText };

std::string_view to_string(Modality modality);
std::string_view to_string(Direction direction);

// "text" / "image"; throws DataError otherwise.
Modality parse_modality(std::string_view text);
// "txt2img" / "img2txt"; throws UsageError otherwise.
Direction parse_direction(std::string_view text);

Modality source_modality(Direction direction);
Modality target_modality(Direction direction);

}  // namespace cardl
