#pragma once

#include "saliex/config.hpp"
#include "saliex/error.hpp"
#include "saliex/evaluation.hpp"
#include "saliex/gif.hpp"
#include "saliex/image.hpp"
#include "saliex/imgcore.hpp"
#include "saliex/io.hpp"
#include "saliex/manipulate.hpp"
#include "saliex/reports.hpp"
#include "saliex/saliency/stack.hpp"
#include "saliex/segmentation.hpp"
