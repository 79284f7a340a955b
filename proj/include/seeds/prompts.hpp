#pragma once

#include <string_view>

// Versioned prompt texts. The canonical copies live in assets/prompts/ and
// are compiled in verbatim.
namespace seeds::prompts {

inline constexpr std::string_view kVersion = "v1";

// Judge prompt when the two inputs are passed as separate images.
std::string_view judge_two_input();
// Judge prompt when the inputs arrive as one 2x2 canvas.
std::string_view judge_grid_input();
// Fixed text prompt shared by combiner training and inference.
std::string_view combination_prompt();

}  // namespace seeds::prompts
