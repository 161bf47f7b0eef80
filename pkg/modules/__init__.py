# Simulator modules package
