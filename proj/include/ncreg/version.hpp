#pragma once

#define NCREG_VERSION "0.1.0"
