# IPTK - intuitionistic proof toolkit
