# Numerical core: airspace, channels, codecs and on-board processing
