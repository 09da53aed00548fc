#include "cardl/types.hpp"

#include "cardl/errors.hpp"

namespace cardl {

std::string_view to_string(Modality modality) {
  return modality == Modality::kText ? "text" : "image";
}

std::string_view to_string(Direction direction) {
  return direction == Direction::kTextToImage ? "txt2img" : "img2txt";
}

Modality parse_modality(std::string_view text) {
  if (text == "text") return Modality::kText;
  if (text == "image") return Modality::kImage;
  throw DataError("unknown modality '" + std::string(text) + "' (expected text or image)");
}

Direction parse_direction(std::string_view text) {
  if (text == "txt2img") return Direction::kTextToImage;
  if (text == "img2txt") return Direction::kImageToText;
  throw UsageError("unknown direction '" + std::string(text) + "' (expected txt2img or img2txt)");
}

Modality source_modality(Direction direction) {
  return direction == Direction::kTextToImage ? Modality::kText : Modality::kImage;
}

Modality target_modality(Direction direction) {
  return direction == Direction::kTextToImage ? Modality::kImage : Modality::kText;
}

}  // namespace cardl
