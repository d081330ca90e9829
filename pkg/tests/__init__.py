# Tests package for pynmqsd
