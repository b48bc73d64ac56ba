#pragma once

#include "frdetect/adam.hpp"
#include "frdetect/checkpoint.hpp"
#include "frdetect/config.hpp"
#include "frdetect/corpus.hpp"
#include "frdetect/fusion.hpp"
#include "frdetect/grad_check.hpp"
#include "frdetect/metrics.hpp"
#include "frdetect/ops.hpp"
#include "frdetect/pipeline.hpp"
#include "frdetect/slcnn.hpp"
#include "frdetect/social.hpp"
#include "frdetect/synthetic.hpp"
#include "frdetect/tensor.hpp"
