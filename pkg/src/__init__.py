# NDSQ: neural stack, queue and deque transduction
# Main source package
